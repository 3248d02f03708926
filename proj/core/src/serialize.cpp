#include "uscrl/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string_view>

#include "uscrl/error.hpp"
#include "uscrl/idx.hpp"

namespace uscrl {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

Json num_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <typename T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const RiskEstimate& e) {
  return {{"estimator", std::string(to_string(e.estimator))},
          {"value", e.value},
          {"n_terms", e.n_terms},
          {"std_error", opt_json(e.std_error)},
          {"seed", opt_json(e.seed)}};
}

Json to_json(const BoundReport& r) {
  Json terms = Json::object();
  Json order = Json::array();
  for (const auto& t : r.terms) {
    terms[t.name] = t.value;
    order.push_back(t.name);
  }
  return {{"theorem", std::string(to_string(r.theorem))},
          {"n_tilde", r.n_tilde},
          {"lambda", r.lambda},
          {"lambda_vacuous", r.lambda_vacuous},
          {"terms", terms},
          {"term_order", order},
          {"total", r.total},
          {"vacuous", r.vacuous},
          {"prior_source", r.prior_source == PriorSource::True ? "true" : "plugin"},
          {"k_constant", opt_json(r.k_constant)},
          {"phi", opt_json(r.phi)}};
}

Json to_json(const LossSpec& l) {
  return {{"kind", std::string(to_string(l.kind))},
          {"clip", num_or_null(l.clip)},
          {"margin", l.margin},
          {"eta", l.eta}};
}

Json to_json(const TrainReport& r, bool include_timing) {
  Json evals = Json::array();
  for (const auto& e : r.evals) {
    evals.push_back({{"epoch", e.epoch},
                     {"risk", e.risk},
                     {"risk_std_error", e.risk_std_error},
                     {"probe_accuracy", opt_json(e.probe_accuracy)}});
  }
  Json spectral = Json::array();
  for (const auto& l : r.model.layers()) {
    Eigen::VectorXd warm = l.power_vector;
    spectral.push_back(spectral_norm(l.weight, &warm));
  }
  Json j = {{"train_loss", r.train_loss},
            {"evals", evals},
            {"eval_kind", r.eval_kind},
            {"steps", r.steps},
            {"n_tuples", r.n_tuples},
            {"final_spectral_norms", spectral}};
  if (include_timing) j["seconds"] = r.seconds;
  return j;
}

Json to_json(const ComplexityResult& r) {
  Json seeds = Json::array();
  for (const auto& s : r.seeds) {
    Json probes = Json::array();
    for (const auto& p : s.probes) probes.push_back({{"n", p.n}, {"risk", p.risk}, {"gap", p.gap}});
    seeds.push_back({{"seed", s.seed},
                     {"n_eps", opt_json(s.n_eps)},
                     {"gap_at_hi", s.gap_at_hi},
                     {"probes", probes}});
  }
  return {{"k", r.k},
          {"num_classes", r.num_classes},
          {"epsilon", r.epsilon},
          {"reference_risk", r.reference_risk},
          {"reference_std_error", r.reference_std_error},
          {"n_ref", r.n_ref},
          {"mean_n_eps", opt_json(r.mean_n_eps)},
          {"reached", r.reached},
          {"seeds", seeds}};
}

std::string tuple_jsonl_line(const TupleView& t) {
  Json j = {{"class", t.class_id},
            {"anchor", t.anchor},
            {"positive", t.positive},
            {"negatives", std::vector<SampleIndex>(t.negatives.begin(), t.negatives.end())}};
  return j.dump();
}

void write_tuples_jsonl(std::ostream& os, const TupleSet& tset) {
  for (std::size_t j = 0; j < tset.size(); ++j) os << tuple_jsonl_line(tset[j]) << '\n';
}

const char* const kRegimeCsvHeader =
    "schema_version,regime,m_tuples,seed,initial_risk,final_risk,risk_std_error,"
    "probe_accuracy,final_train_loss,loss_clip,config_hash";
const char* const kComplexityCsvHeader =
    "schema_version,num_classes,k,epsilon,seed,n_eps,reached,gap_at_hi,reference_risk,n_ref,"
    "mean_n_eps,config_hash";
const char* const kBoundCsvHeader =
    "schema_version,theorem,sweep_param,sweep_value,n_tilde,lambda,total,vacuous,terms,config_hash";

void write_regime_csv(std::ostream& os, std::span<const RegimeRow> rows,
                      std::string_view config_hash) {
  os << kRegimeCsvHeader << '\n';
  for (const auto& r : rows) {
    os << kCsvSchemaVersion << ',' << to_string(r.regime) << ',' << r.m_tuples << ',' << r.seed
       << ',' << format_double(r.initial_risk) << ',' << format_double(r.final_risk) << ','
       << format_double(r.risk_std_error) << ','
       << (r.probe_accuracy ? format_double(*r.probe_accuracy) : "") << ','
       << format_double(r.final_train_loss) << ',' << format_double(r.loss_clip) << ','
       << config_hash << '\n';
  }
}

void write_complexity_csv(std::ostream& os, std::span<const ComplexityResult> results,
                          std::string_view config_hash) {
  os << kComplexityCsvHeader << '\n';
  for (const auto& r : results) {
    for (const auto& s : r.seeds) {
      os << kCsvSchemaVersion << ',' << r.num_classes << ',' << r.k << ','
         << format_double(r.epsilon) << ',' << s.seed << ','
         << (s.n_eps ? std::to_string(*s.n_eps) : "") << ',' << (s.n_eps ? 1 : 0) << ','
         << format_double(s.gap_at_hi) << ',' << format_double(r.reference_risk) << ','
         << r.n_ref << ',' << (r.mean_n_eps ? format_double(*r.mean_n_eps) : "") << ','
         << config_hash << '\n';
    }
  }
}

void write_bound_csv_row(std::ostream& os, const std::string& sweep_param, double sweep_value,
                         const BoundReport& r, std::string_view config_hash) {
  std::string terms;
  for (const auto& t : r.terms) {
    if (!terms.empty()) terms += ';';
    terms += t.name + "=" + format_double(t.value);
  }
  os << kCsvSchemaVersion << ',' << to_string(r.theorem) << ',' << sweep_param << ','
     << format_double(sweep_value) << ',' << format_double(r.n_tilde) << ','
     << format_double(r.lambda) << ',' << format_double(r.total) << ','
     << (r.vacuous ? 1 : 0) << ',' << terms << ',' << config_hash << '\n';
}

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(join(path, key) + ": unknown field");
    }
  }
}

}  // namespace

void check_config_keys(const Json& j, const std::string& path,
                       std::initializer_list<std::string_view> allowed) {
  check_keys(j, path, allowed);
}

namespace {

template <typename T>
T read(const Json& j, const std::string& path, std::string_view key, T fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return fallback;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ConfigError(join(path, key) + ": expected a number");
    } else if constexpr (std::is_same_v<T, bool>) {  // before the unsigned branch: bool is unsigned
      if (!it->is_boolean()) throw ConfigError(join(path, key) + ": expected a boolean");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) {
        throw ConfigError(join(path, key) + ": expected a non-negative integer");
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(join(path, key) + ": expected a string");
    }
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(join(path, key) + ": " + e.what());
  }
}

template <typename T>
T require_field(const Json& j, const std::string& path, std::string_view key) {
  if (!j.contains(std::string(key)) || j.at(std::string(key)).is_null()) {
    throw ConfigError(join(path, key) + ": required field missing");
  }
  return read<T>(j, path, key, T{});
}

template <typename T>
std::vector<T> read_array(const Json& j, const std::string& path, std::string_view key,
                          std::vector<T> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_array()) throw ConfigError(join(path, key) + ": expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string p = join(path, key) + "[" + std::to_string(i) + "]";
    const auto& v = (*it)[i];
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(p + ": expected a number");
    } else {
      if (!v.is_number_unsigned()) throw ConfigError(p + ": expected a non-negative integer");
    }
    out.push_back(v.get<T>());
  }
  return out;
}

// Clip may be a number, "default" (4 log(1+k)) or null (no clipping).
double read_clip(const Json& j, const std::string& path, std::size_t k) {
  const auto it = j.find("clip");
  if (it == j.end()) return default_clip(k);
  if (it->is_null()) return kInf;
  if (it->is_string() && it->get<std::string>() == "default") return default_clip(k);
  if (it->is_number()) return it->get<double>();
  throw ConfigError(join(path, "clip") + ": expected a number, \"default\" or null");
}

template <typename F>
auto wrap(const std::string& path, F&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + what);
  }
}

}  // namespace

LossSpec parse_loss(const Json& j, const std::string& path, std::size_t k) {
  LossSpec l;
  if (j.is_null()) {
    l.clip = default_clip(k);
    return l;
  }
  check_keys(j, path, {"kind", "clip", "margin", "eta"});
  l.kind = wrap(join(path, "kind"),
                [&] { return loss_kind_from_string(read<std::string>(j, path, "kind", "logistic")); });
  l.clip = read_clip(j, path, k);
  l.margin = read<double>(j, path, "margin", 1.0);
  l.eta = read<double>(j, path, "eta", 1.0);
  wrap(path, [&] { l.validate(); return 0; });
  return l;
}

ModelConfig parse_model(const Json& j, const std::string& path) {
  ModelConfig m;
  if (j.is_null()) return m;
  check_keys(j, path, {"family", "hidden", "output_dim", "activation", "output_activation",
                       "spectral_cap", "norm21_cap"});
  m.family = wrap(join(path, "family"), [&] {
    return model_family_from_string(read<std::string>(j, path, "family", "mlp"));
  });
  m.hidden = read_array<std::size_t>(j, path, "hidden", m.hidden);
  if (m.family == ModelFamily::Linear) m.hidden.clear();
  m.output_dim = read<std::size_t>(j, path, "output_dim", m.output_dim);
  m.activation = wrap(join(path, "activation"), [&] {
    return activation_from_string(read<std::string>(j, path, "activation", "relu"));
  });
  m.output_activation = wrap(join(path, "output_activation"), [&] {
    return activation_from_string(read<std::string>(j, path, "output_activation", "identity"));
  });
  m.spectral_cap = read<double>(j, path, "spectral_cap", m.spectral_cap);
  m.norm21_cap = j.contains("norm21_cap") && !j["norm21_cap"].is_null()
                     ? read<double>(j, path, "norm21_cap", kInf)
                     : kInf;
  wrap(path, [&] { m.validate(); return 0; });
  return m;
}

TrainConfig parse_train(const Json& j, const std::string& path) {
  TrainConfig c;
  if (j.is_null()) {
    c.loss = logistic_loss(c.k);
    return c;
  }
  check_keys(j, path, {"model", "loss", "k", "regime", "m_tuples", "epochs", "batch", "lr",
                       "momentum", "seed", "eval_every", "resample_per_epoch", "steps_per_epoch",
                       "materialize_limit", "all_tuples_cap", "force_all_tuples",
                       "monitor_tuples", "eval_draws", "eval_seed", "run_probe", "probe_samples",
                       "probe"});
  c.k = read<std::size_t>(j, path, "k", c.k);
  c.model = parse_model(j.value("model", Json()), join(path, "model"));
  c.loss = parse_loss(j.value("loss", Json()), join(path, "loss"), c.k);
  c.regime = wrap(join(path, "regime"), [&] {
    return regime_from_string(read<std::string>(j, path, "regime", "sub"));
  });
  c.m_tuples = read<std::size_t>(j, path, "m_tuples", c.m_tuples);
  c.epochs = read<std::size_t>(j, path, "epochs", c.epochs);
  c.batch = read<std::size_t>(j, path, "batch", c.batch);
  c.lr = read<double>(j, path, "lr", c.lr);
  c.momentum = read<double>(j, path, "momentum", c.momentum);
  c.seed = read<std::uint64_t>(j, path, "seed", c.seed);
  c.eval_every = read<std::size_t>(j, path, "eval_every", c.eval_every);
  c.resample_per_epoch = read<bool>(j, path, "resample_per_epoch", c.resample_per_epoch);
  c.steps_per_epoch = read<std::size_t>(j, path, "steps_per_epoch", c.steps_per_epoch);
  c.materialize_limit = read<std::size_t>(j, path, "materialize_limit", c.materialize_limit);
  c.all_tuples_cap = read<std::uint64_t>(j, path, "all_tuples_cap", c.all_tuples_cap);
  c.force_all_tuples = read<bool>(j, path, "force_all_tuples", c.force_all_tuples);
  c.monitor_tuples = read<std::size_t>(j, path, "monitor_tuples", c.monitor_tuples);
  c.eval_draws = read<std::uint64_t>(j, path, "eval_draws", c.eval_draws);
  c.eval_seed = read<std::uint64_t>(j, path, "eval_seed", c.eval_seed);
  c.run_probe = read<bool>(j, path, "run_probe", c.run_probe);
  c.probe_samples = read<std::size_t>(j, path, "probe_samples", c.probe_samples);
  if (j.contains("probe") && !j["probe"].is_null()) {
    const auto& p = j["probe"];
    const std::string pp = join(path, "probe");
    check_keys(p, pp, {"epochs", "lr", "batch", "test_fraction"});
    c.probe.epochs = read<std::size_t>(p, pp, "epochs", c.probe.epochs);
    c.probe.lr = read<double>(p, pp, "lr", c.probe.lr);
    c.probe.batch = read<std::size_t>(p, pp, "batch", c.probe.batch);
    c.probe.test_fraction = read<double>(p, pp, "test_fraction", c.probe.test_fraction);
  }
  wrap(path, [&] { c.validate(); return 0; });
  return c;
}

GaussianSpec parse_gaussian(const Json& j, const std::string& path) {
  check_keys(j, path, {"num_classes", "dim", "sigma", "priors", "center_scale", "center_seed",
                       "centers"});
  const auto num_classes = require_field<std::size_t>(j, path, "num_classes");
  const auto dim = read<std::size_t>(j, path, "dim", 128);
  const double sigma = read<double>(j, path, "sigma", 0.1);
  GaussianSpec spec;
  if (j.contains("centers")) {
    spec.num_classes = num_classes;
    spec.dim = dim;
    spec.sigma = sigma;
    const auto& cs = j["centers"];
    if (!cs.is_array()) throw ConfigError(join(path, "centers") + ": expected an array of arrays");
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const std::string p = join(path, "centers") + "[" + std::to_string(c) + "]";
      if (!cs[c].is_array()) throw ConfigError(p + ": expected an array");
      Eigen::VectorXd g(static_cast<Eigen::Index>(cs[c].size()));
      for (std::size_t i = 0; i < cs[c].size(); ++i) {
        if (!cs[c][i].is_number()) throw ConfigError(p + ": expected numbers");
        g[static_cast<Eigen::Index>(i)] = cs[c][i].get<double>();
      }
      spec.centers.push_back(std::move(g));
    }
  } else {
    spec = make_gaussian_spec(num_classes, dim, sigma, read<double>(j, path, "center_scale", 1.0),
                              read<std::uint64_t>(j, path, "center_seed", 0));
  }
  spec.priors = read_array<double>(j, path, "priors", {});
  wrap(path, [&] { spec.validate(); return 0; });
  return spec;
}

BoundInputs parse_bound_inputs(const Json& j, const std::string& path) {
  check_keys(j, path, {"n", "k", "num_classes", "priors", "prior_source", "delta", "loss_bound",
                       "eta", "linear", "nn", "m_tuples", "k_per_class", "emp_rad_sub"});
  BoundInputs in;
  in.n = require_field<double>(j, path, "n");
  in.k = read<double>(j, path, "k", 1.0);
  in.num_classes = require_field<std::size_t>(j, path, "num_classes");
  in.priors = read_array<double>(j, path, "priors", {});
  const auto src = read<std::string>(j, path, "prior_source", "true");
  if (src != "true" && src != "plugin") {
    throw ConfigError(join(path, "prior_source") + ": expected \"true\" or \"plugin\"");
  }
  in.prior_source = src == "true" ? PriorSource::True : PriorSource::PlugIn;
  in.delta = read<double>(j, path, "delta", 0.1);
  in.loss_bound = read<double>(j, path, "loss_bound", 1.0);
  in.eta = read<double>(j, path, "eta", 1.0);
  if (j.contains("linear") && !j["linear"].is_null()) {
    const auto& l = j["linear"];
    const std::string lp = join(path, "linear");
    check_keys(l, lp, {"a", "s", "b", "d"});
    in.linear = LinearClassParams{read<double>(l, lp, "a", 1.0), read<double>(l, lp, "s", 1.0),
                                  read<double>(l, lp, "b", 1.0), read<double>(l, lp, "d", 1.0)};
  }
  if (j.contains("nn") && !j["nn"].is_null()) {
    const auto& n = j["nn"];
    const std::string np = join(path, "nn");
    check_keys(n, np, {"w", "b", "s", "xi"});
    NnClassParams p;
    p.w = require_field<double>(n, np, "w");
    p.b = read<double>(n, np, "b", 1.0);
    p.s = read_array<double>(n, np, "s", {});
    p.xi = read_array<double>(n, np, "xi", std::vector<double>(p.s.size(), 1.0));
    in.nn = p;
  }
  if (j.contains("m_tuples") && !j["m_tuples"].is_null()) in.m_tuples = read<double>(j, path, "m_tuples", 1.0);
  in.k_per_class = read_array<double>(j, path, "k_per_class", {});
  in.emp_rad_sub = read<double>(j, path, "emp_rad_sub", 0.0);
  wrap(path, [&] { in.validate(); return 0; });
  return in;
}

RegimeOptions parse_regime_options(const Json& j, const std::string& path) {
  RegimeOptions o;
  if (j.is_null()) return o;
  check_keys(j, path, {"n_disjoint", "m_grid", "seeds", "include_iid", "include_all",
                       "force_all", "all_steps_per_epoch"});
  o.n_disjoint = read<std::size_t>(j, path, "n_disjoint", o.n_disjoint);
  o.m_grid = read_array<std::size_t>(j, path, "m_grid", o.m_grid);
  o.seeds = read_array<std::uint64_t>(j, path, "seeds", o.seeds);
  o.include_iid = read<bool>(j, path, "include_iid", o.include_iid);
  o.include_all = read<bool>(j, path, "include_all", o.include_all);
  o.force_all = read<bool>(j, path, "force_all", o.force_all);
  o.all_steps_per_epoch = read<std::size_t>(j, path, "all_steps_per_epoch", o.all_steps_per_epoch);
  return o;
}

ComplexityOptions parse_complexity_options(const Json& j, const std::string& path) {
  ComplexityOptions o;
  if (j.is_null()) return o;
  check_keys(j, path, {"epsilon", "lo", "hi", "search_tol", "seeds", "ref_multiplier",
                       "ref_epoch_factor", "m_equals_n_squared"});
  o.epsilon = read<double>(j, path, "epsilon", o.epsilon);
  o.lo = read<std::size_t>(j, path, "lo", o.lo);
  o.hi = read<std::size_t>(j, path, "hi", o.hi);
  o.search_tol = read<std::size_t>(j, path, "search_tol", o.search_tol);
  o.seeds = read_array<std::uint64_t>(j, path, "seeds", o.seeds);
  o.ref_multiplier = read<std::size_t>(j, path, "ref_multiplier", o.ref_multiplier);
  o.ref_epoch_factor = read<std::size_t>(j, path, "ref_epoch_factor", o.ref_epoch_factor);
  o.m_equals_n_squared = read<bool>(j, path, "m_equals_n_squared", o.m_equals_n_squared);
  if (!(o.lo < o.hi)) throw ConfigError(path + ": lo must be < hi");
  if (!(o.epsilon > 0.0)) throw ConfigError(join(path, "epsilon") + ": must be > 0");
  return o;
}

DatasetSource parse_dataset_source(const Json& j, const std::string& path) {
  check_keys(j, path, {"source", "spec", "n", "seed", "images", "labels", "limit", "features",
                       "num_classes"});
  DatasetSource s;
  s.kind = require_field<std::string>(j, path, "source");
  if (s.kind == "gaussian") {
    if (!j.contains("spec")) throw ConfigError(join(path, "spec") + ": required field missing");
    s.spec = parse_gaussian(j["spec"], join(path, "spec"));
    s.n = require_field<std::size_t>(j, path, "n");
    if (s.n == 0) throw ConfigError(join(path, "n") + ": must be >= 1");
    s.seed = read<std::uint64_t>(j, path, "seed", 0);
  } else if (s.kind == "idx") {
    s.images = require_field<std::string>(j, path, "images");
    s.labels = require_field<std::string>(j, path, "labels");
    s.limit = read<std::size_t>(j, path, "limit", 0);
  } else if (s.kind == "inline") {
    if (!j.contains("features") || !j["features"].is_array()) {
      throw ConfigError(join(path, "features") + ": expected an array of feature vectors");
    }
    const auto labels = read_array<std::size_t>(j, path, "labels", {});
    if (labels.size() != j["features"].size()) {
      throw ConfigError(join(path, "labels") + ": must have one label per feature vector");
    }
    require_field<std::size_t>(j, path, "num_classes");
    s.inline_data = j;
  } else {
    throw ConfigError(join(path, "source") + ": expected \"gaussian\", \"idx\" or \"inline\"");
  }
  return s;
}

LabeledDataset materialize(const DatasetSource& src) {
  if (src.kind == "gaussian") return generate_gaussian(*src.spec, src.n, src.seed);
  if (src.kind == "idx") {
    auto ds = load_idx(src.images, src.labels);
    if (src.limit > 0 && src.limit < ds.size()) {
      std::vector<SampleIndex> keep(src.limit);
      for (std::size_t i = 0; i < src.limit; ++i) keep[i] = static_cast<SampleIndex>(i);
      ds = ds.subset(keep);
    }
    return ds;
  }
  const auto& j = src.inline_data;
  const auto& feats = j["features"];
  const auto num_classes = j["num_classes"].get<std::size_t>();
  const std::size_t n = feats.size();
  const std::size_t dim = n > 0 ? feats[0].size() : 0;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = "dataset.features[" + std::to_string(i) + "]";
    if (!feats[i].is_array() || feats[i].size() != dim) {
      throw ConfigError(p + ": every feature vector must have dimension " + std::to_string(dim));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      if (!feats[i][d].is_number()) throw ConfigError(p + ": expected numbers");
      x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = feats[i][d].get<double>();
    }
    labels[i] = j["labels"][i].get<ClassId>();
    if (labels[i] >= num_classes) {
      throw ConfigError("dataset.labels[" + std::to_string(i) + "]: label out of range");
    }
  }
  return LabeledDataset(std::move(x), std::move(labels), num_classes);
}

}  // namespace uscrl
