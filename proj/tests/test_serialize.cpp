#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "uscrl/error.hpp"
#include "uscrl/serialize.hpp"

using namespace uscrl;

namespace {

std::string config_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("doubles round-trip through their text form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("tuple JSONL lines") {
  const std::vector<SampleIndex> neg{3, 7};
  CHECK(tuple_jsonl_line(TupleView{4, 1, neg, 2}) ==
        R"({"anchor":4,"class":2,"negatives":[3,7],"positive":1})");

  const auto ds = test::make_pool({4, 4}, 2, 1);
  const auto set = subsample_tuples(ds, 2, 6, 1);
  std::ostringstream os;
  write_tuples_jsonl(os, set);
  std::istringstream is(os.str());
  std::string line;
  std::size_t j = 0;
  while (std::getline(is, line)) {
    const auto parsed = Json::parse(line);
    CHECK(parsed["anchor"] == set[j].anchor);
    CHECK(parsed["negatives"].size() == 2);
    ++j;
  }
  CHECK(j == 6);
}

TEST_CASE("CSV headers are stable") {
  CHECK(std::string(kRegimeCsvHeader) ==
        "schema_version,regime,m_tuples,seed,initial_risk,final_risk,risk_std_error,"
        "probe_accuracy,final_train_loss,loss_clip,config_hash");
  CHECK(std::string(kComplexityCsvHeader) ==
        "schema_version,num_classes,k,epsilon,seed,n_eps,reached,gap_at_hi,reference_risk,n_ref,"
        "mean_n_eps,config_hash");
  CHECK(std::string(kBoundCsvHeader) ==
        "schema_version,theorem,sweep_param,sweep_value,n_tilde,lambda,total,vacuous,terms,config_hash");

  RegimeRow row;
  row.regime = Regime::SubSampled;
  row.m_tuples = 100;
  row.seed = 3;
  row.final_risk = 0.25;
  std::ostringstream os;
  const std::vector<RegimeRow> rows{row, row};
  write_regime_csv(os, rows, "abc");
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == kRegimeCsvHeader);
  int n = 0;
  while (std::getline(is, line)) {
    CHECK(line.rfind("1,sub,100,3,", 0) == 0);
    CHECK(line.ends_with(",abc"));
    CHECK(std::count(line.begin(), line.end(), ',') == 10);
    ++n;
  }
  CHECK(n == 2);
}

TEST_CASE("report JSON") {
  RiskEstimate e;
  e.value = 1.5;
  e.n_terms = 10;
  const auto j = to_json(e);
  CHECK(j["value"] == 1.5);
  CHECK(j["std_error"].is_null());

  BoundInputs in;
  in.n = 1000;
  in.k = 3;
  in.num_classes = 10;
  in.k_per_class.assign(10, 0.1);
  const auto b = to_json(basic_bound(in));
  CHECK(b["term_order"] == Json::array({"complexity", "confidence"}));
  CHECK(b["prior_source"] == "true");
  CHECK(b["terms"]["confidence"].get<double>() > 0);

  LossSpec l;
  CHECK(to_json(l)["clip"].is_null());
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_error([] { parse_train(Json::parse(R"({"epochs": -1})"), "train"); })
            .find("train.epochs") != std::string::npos);
  CHECK(config_error([] { parse_train(Json::parse(R"({"lr": "fast"})"), "train"); })
            .find("train.lr") != std::string::npos);
  CHECK(config_error([] { parse_train(Json::parse(R"({"epoch": 3})"), "train"); }) ==
        "train.epoch: unknown field");
  CHECK(config_error([] { parse_model(Json::parse(R"({"family": "cnn"})"), "train.model"); })
            .find("train.model.family") != std::string::npos);
  CHECK(config_error([] { parse_loss(Json::parse(R"({"clip": "big"})"), "loss", 2); })
            .find("loss.clip") != std::string::npos);
  CHECK(config_error([] { parse_bound_inputs(Json::parse(R"({"num_classes": 3})"), "inputs"); })
            .find("inputs.n") != std::string::npos);
  CHECK(config_error([] {
          parse_bound_inputs(Json::parse(R"({"n": 100, "num_classes": 3, "delta": 1.5})"), "inputs");
        }).find("delta") != std::string::npos);
  CHECK(config_error([] { parse_gaussian(Json::parse(R"({"num_classes": 3, "sigma": -1})"), "spec"); })
            .find("spec") == 0);
  CHECK(config_error([] { parse_dataset_source(Json::parse(R"({"source": "csv"})"), "dataset"); })
            .find("dataset") == 0);
}

TEST_CASE("config parsing defaults and clip forms") {
  const auto t = parse_train(Json(), "train");
  CHECK(t.loss.clip == doctest::Approx(default_clip(t.k)));
  CHECK(parse_loss(Json::parse(R"({"clip": null})"), "loss", 2).clip == kInf);
  CHECK(parse_loss(Json::parse(R"({"clip": "default"})"), "loss", 3).clip ==
        doctest::Approx(4 * std::log(4.0)));
  CHECK(parse_loss(Json::parse(R"({"clip": 2.5})"), "loss", 3).clip == 2.5);

  const auto ro = parse_regime_options(Json::parse(R"({"include_all": false, "force_all": true})"), "r");
  CHECK_FALSE(ro.include_all);
  CHECK(ro.force_all);
  CHECK(config_error([] { parse_regime_options(Json::parse(R"({"include_all": 1})"), "r"); }) ==
        "r.include_all: expected a boolean");

  const auto lin = parse_model(Json::parse(R"({"family": "linear", "norm21_cap": 3})"), "m");
  CHECK(lin.family == ModelFamily::Linear);
  CHECK(lin.hidden.empty());
  CHECK(lin.norm21_cap == 3.0);
}

TEST_CASE("inline and gaussian dataset sources") {
  const auto src = parse_dataset_source(Json::parse(R"({
    "source": "inline", "features": [[0, 1], [1, 0], [2, 2]], "labels": [0, 1, 1], "num_classes": 2})"),
                                        "dataset");
  const auto ds = materialize(src);
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.class_size(1) == 2);

  const auto g = parse_dataset_source(Json::parse(R"({
    "source": "gaussian", "n": 50, "seed": 4, "spec": {"num_classes": 3, "dim": 5}})"),
                                      "dataset");
  const auto a = materialize(g);
  const auto b = materialize(g);
  CHECK(a.size() == 50);
  CHECK(a.features() == b.features());
}
