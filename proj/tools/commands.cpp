#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>

#include "uscrl/bounds.hpp"
#include "uscrl/checkpoint.hpp"
#include "uscrl/error.hpp"
#include "uscrl/experiments.hpp"
#include "uscrl/risk.hpp"
#include "uscrl/summation.hpp"
#include "uscrl/trainer.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t get_u64(const Json& j, const std::string& key, std::uint64_t fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  if (j[key].is_number_unsigned()) return j[key].get<std::uint64_t>();
  // Caps such as 1e6 are often written as floats.
  if (j[key].is_number_float()) {
    const double v = j[key].get<double>();
    if (v >= 0.0 && v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  throw ConfigError(key + ": expected a non-negative integer");
}

std::string get_string(const Json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  if (!j[key].is_string()) throw ConfigError(key + ": expected a string");
  return j[key].get<std::string>();
}

const Json& require(const Json& j, const std::string& key) {
  if (!j.contains(key) || j[key].is_null()) throw ConfigError(key + ": required field missing");
  return j[key];
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

// Relative paths in a config are taken relative to the config file.
DatasetSource dataset_from(const Json& j, const std::string& path, const fs::path& base) {
  DatasetSource src = parse_dataset_source(j, path);
  if (src.kind == "idx") {
    src.images = resolve(base, src.images);
    src.labels = resolve(base, src.labels);
  }
  return src;
}

Json with_seed(Json cfg, const GlobalOptions& opts) {
  if (opts.seed) cfg["seed"] = *opts.seed;
  return cfg;
}

fs::path config_dir(const GlobalOptions& opts) {
  return opts.config.has_parent_path() ? opts.config.parent_path() : fs::path(".");
}

std::mutex log_mutex;

void log_line(const std::string& line) {
  std::lock_guard lock(log_mutex);
  std::cerr << "[uscrl] " << line << '\n';
}

}  // namespace

void cmd_sample(const GlobalOptions& opts) {
  const Json cfg = with_seed(read_config(opts.config), opts);
  check_config_keys(cfg, "", {"dataset", "regime", "k", "m_tuples", "seed", "cap"});
  RunContext run("sample", cfg, opts);
  const auto src = dataset_from(require(cfg, "dataset"), "dataset", config_dir(opts));
  const auto ds = load_dataset(src, cfg["dataset"]);
  const std::size_t k = get_u64(cfg, "k", 2);
  const std::uint64_t seed = get_u64(cfg, "seed", 0);
  Regime regime;
  try {
    regime = regime_from_string(get_string(cfg, "regime", "sub"));
  } catch (const Error& e) {
    throw ConfigError(std::string("regime: ") + e.what());
  }
  run.record_seeds({seed});

  TupleSet tset(regime, k);
  switch (regime) {
    case Regime::IidDisjoint:
      tset = greedy_iid_tuples(ds, k, {}, seed);
      break;
    case Regime::SubSampled: {
      const std::size_t m = get_u64(cfg, "m_tuples", 1000);
      if (m > 0) tset = subsample_tuples(ds, k, m, seed);
      break;
    }
    case Regime::AllTuples:
      tset = enumerate_all_tuples(ds, k, get_u64(cfg, "cap", kDefaultTupleCap));
      break;
  }

  std::ofstream os(run.output("tuples.jsonl"));
  write_tuples_jsonl(os, tset);
  os.close();
  std::cout << "regime=" << to_string(regime) << " k=" << k << " samples=" << ds.size()
            << " classes=" << ds.num_classes() << " tuples=" << tset.size() << '\n';
  run.finish();
}

void cmd_estimate(const GlobalOptions& opts) {
  const Json cfg = with_seed(read_config(opts.config), opts);
  check_config_keys(cfg, "", {"dataset", "checkpoint", "model", "init_seed", "estimator", "k",
                              "loss", "draws", "m_tuples", "seed", "cap"});
  RunContext run("estimate", cfg, opts);
  const fs::path base = config_dir(opts);
  const auto src = dataset_from(require(cfg, "dataset"), "dataset", base);
  const auto ds = load_dataset(src, cfg["dataset"]);
  const std::size_t k = get_u64(cfg, "k", 2);
  const std::uint64_t seed = get_u64(cfg, "seed", 0);
  const std::uint64_t draws = get_u64(cfg, "draws", 10000);
  const std::uint64_t cap = get_u64(cfg, "cap", kDefaultTupleCap);
  const LossSpec loss = parse_loss(cfg.value("loss", Json()), "loss", k);
  run.record_seeds({seed});

  RepresentationModel f;
  if (cfg.contains("checkpoint")) {
    f = load_checkpoint(resolve(base, get_string(cfg, "checkpoint", "")));
  } else if (cfg.contains("model")) {
    f = build_model(parse_model(cfg["model"], "model"), ds.dim(), get_u64(cfg, "init_seed", 0));
  } else {
    throw ConfigError("checkpoint: required field missing (or give model)");
  }
  if (f.input_dim() != ds.dim()) {
    throw ConfigError("checkpoint: model input dimension " + std::to_string(f.input_dim()) +
                      " does not match dataset dimension " + std::to_string(ds.dim()));
  }

  Estimator est;
  try {
    est = estimator_from_string(get_string(cfg, "estimator", "ustat_exact"));
  } catch (const Error& e) {
    throw ConfigError(std::string("estimator: ") + e.what());
  }

  RiskEstimate r;
  switch (est) {
    case Estimator::SubSampled:
      r = subsampled_risk(f, ds, subsample_tuples(ds, k, get_u64(cfg, "m_tuples", 1000), seed), loss);
      r.seed = seed;
      break;
    case Estimator::UStatExact:
      r = ustat_overall(f, ds, k, loss, EstimateMode::exact(cap));
      break;
    case Estimator::UStatMC:
      r = ustat_overall(f, ds, k, loss, EstimateMode::monte_carlo(draws, seed));
      break;
    case Estimator::UStatDecoupled: {
      // One uniformly drawn permutation pair per class.
      const auto reps = representations(f, ds);
      std::mt19937_64 rng(seed);
      r.estimator = Estimator::UStatDecoupled;
      r.seed = seed;
      CompensatedSum total;
      for (const auto& st : class_stats(ds, k)) {
        if (st.n_c == 0) continue;
        const auto perm = random_permutation(ds, st.c, rng);
        const auto block = decoupled_block_estimate(reps, ds, st.c, k, loss, perm);
        total.add(st.rho_hat * block.value);
        r.n_terms += block.n_terms;
      }
      r.value = total.value();
      break;
    }
    case Estimator::VStat:
      r = vstat_overall(f, ds, k, loss, EstimateMode::exact(cap));
      break;
    case Estimator::VStatMC:
      r = vstat_overall(f, ds, k, loss, EstimateMode::monte_carlo(draws, seed));
      break;
    case Estimator::PopulationMC:
      if (src.kind != "gaussian") {
        throw PreconditionError("estimator population_mc is unsupported for " + src.kind +
                                " datasets: it needs a known generator");
      }
      r = population_risk_mc(f, *src.spec, k, loss, draws, seed);
      break;
    case Estimator::Enumeration:
      r = enumeration_risk(f, ds, k, loss, cap);
      break;
  }
  Json out = to_json(r);
  out["k"] = k;
  out["loss"] = to_json(loss);
  run.write_json("estimate.json", out);
  std::cout << to_string(r.estimator) << '=' << format_double(r.value) << '\n';
  run.finish();
}

namespace {

std::vector<double> sweep_values(const Json& sweep) {
  if (sweep.contains("values")) {
    if (!sweep["values"].is_array()) throw ConfigError("sweep.values: expected an array");
    std::vector<double> v;
    for (const auto& x : sweep["values"]) {
      if (!x.is_number()) throw ConfigError("sweep.values: expected numbers");
      v.push_back(x.get<double>());
    }
    return v;
  }
  for (const char* key : {"start", "stop"}) {
    if (!sweep.contains(key) || !sweep[key].is_number()) {
      throw ConfigError(std::string("sweep.") + key + ": required number missing");
    }
  }
  const double start = sweep["start"].get<double>();
  const double stop = sweep["stop"].get<double>();
  const double step = sweep.value("step", 1.0);
  if (!(step > 0.0)) throw ConfigError("sweep.step: must be > 0");
  std::vector<double> v;
  // Integer index avoids drift on long grids.
  for (std::size_t i = 0;; ++i) {
    const double x = start + static_cast<double>(i) * step;
    if (x > stop + 1e-9 * step) break;
    v.push_back(x);
  }
  return v;
}

}  // namespace

void cmd_bounds(const GlobalOptions& opts) {
  const Json cfg = with_seed(read_config(opts.config), opts);
  check_config_keys(cfg, "", {"theorem", "inputs", "sweep", "seed"});
  RunContext run("bounds", cfg, opts);
  TheoremId id;
  try {
    id = theorem_from_string(get_string(cfg, "theorem", "basic"));
  } catch (const Error& e) {
    throw ConfigError(std::string("theorem: ") + e.what());
  }
  const Json& inputs = require(cfg, "inputs");

  if (!cfg.contains("sweep")) {
    const auto report = evaluate_bound(id, parse_bound_inputs(inputs, "inputs"));
    run.write_json("bounds.json", to_json(report));
    std::cout << to_string(id) << " total=" << format_double(report.total)
              << (report.vacuous ? " (vacuous)" : "") << '\n';
    run.finish();
    return;
  }

  const Json& sweep = cfg["sweep"];
  check_config_keys(sweep, "sweep", {"param", "values", "start", "stop", "step"});
  const std::string param = get_string(sweep, "param", "");
  static const std::vector<std::string> kSweepable{"n", "k", "delta", "loss_bound", "eta",
                                                   "m_tuples", "num_classes", "emp_rad_sub", "w"};
  if (std::find(kSweepable.begin(), kSweepable.end(), param) == kSweepable.end()) {
    throw ConfigError("sweep.param: cannot sweep '" + param + "'");
  }
  std::ofstream os(run.output("bounds.csv"));
  os << kBoundCsvHeader << '\n';
  std::size_t rows = 0;
  for (double v : sweep_values(sweep)) {
    Json point = inputs;
    const bool integral = param == "num_classes";
    if (param == "w") {
      if (!point.contains("nn")) throw ConfigError("sweep.param: 'w' needs inputs.nn");
      point["nn"]["w"] = v;
    } else if (integral) {
      point[param] = static_cast<std::uint64_t>(v);
    } else {
      point[param] = v;
    }
    const auto report = evaluate_bound(id, parse_bound_inputs(point, "inputs"));
    write_bound_csv_row(os, param, v, report, run.config_hash());
    ++rows;
  }
  os.close();
  std::cout << to_string(id) << " sweep over " << param << ": " << rows << " rows\n";
  run.finish();
}

namespace {

EvalSource eval_source_for(const Json& cfg, const DatasetSource& src, const fs::path& base) {
  EvalSource eval;
  if (src.kind == "gaussian") eval.generator = src.spec;
  if (cfg.contains("heldout") && !cfg["heldout"].is_null()) {
    const auto h = dataset_from(cfg["heldout"], "heldout", base);
    eval.heldout = load_dataset(h, cfg["heldout"]);
    eval.generator.reset();
  }
  return eval;
}

}  // namespace

void cmd_train(const GlobalOptions& opts) {
  Json cfg = read_config(opts.config);
  if (opts.seed) cfg["train"]["seed"] = *opts.seed;
  check_config_keys(cfg, "", {"dataset", "heldout", "train"});
  RunContext run("train", cfg, opts);
  const fs::path base = config_dir(opts);
  const auto src = dataset_from(require(cfg, "dataset"), "dataset", base);
  const auto ds = load_dataset(src, cfg["dataset"]);
  const TrainConfig tc = parse_train(cfg.value("train", Json()), "train");
  run.record_seeds({tc.seed});
  const EvalSource eval = eval_source_for(cfg, src, base);

  const TrainReport rep = train(ds, tc, eval);
  const fs::path model_path = run.output("model.json");
  run.output("model.bin");
  save_checkpoint(rep.model, model_path);
  {
    // Point the checkpoint back at its manifest.
    Json meta = Json::parse(std::ifstream(model_path));
    meta["manifest"] = kManifestName;
    std::ofstream(model_path) << meta.dump(2) << '\n';
  }
  Json out = to_json(rep, false);
  out["checkpoint"] = "model.json";
  out["loss"] = to_json(tc.loss);
  run.write_json("report.json", out);
  log_line("trained " + std::to_string(rep.steps) + " steps in " +
           format_double(rep.seconds) + " s");
  std::cout << "final_risk=" << format_double(rep.final_risk()) << '\n';
  run.finish();
}

void cmd_experiment_regimes(const GlobalOptions& opts) {
  Json cfg = read_config(opts.config);
  if (opts.seed) cfg["regimes"]["seeds"] = Json::array({*opts.seed});
  check_config_keys(cfg, "", {"dataset", "heldout", "train", "regimes"});
  RunContext run("experiment regimes", cfg, opts);
  const fs::path base = config_dir(opts);
  const auto src = dataset_from(require(cfg, "dataset"), "dataset", base);
  const auto pool = load_dataset(src, cfg["dataset"]);
  const TrainConfig tc = parse_train(cfg.value("train", Json()), "train");
  const RegimeOptions ro = parse_regime_options(cfg.value("regimes", Json()), "regimes");
  const EvalSource eval = eval_source_for(cfg, src, base);
  run.record_seeds(ro.seeds);

  // One job per seed; rows are concatenated in seed order.
  std::vector<std::vector<RegimeRow>> per_seed(ro.seeds.size());
  run_jobs(ro.seeds.size(), run.jobs(), [&](std::size_t i) {
    RegimeOptions one = ro;
    one.seeds = {ro.seeds[i]};
    per_seed[i] = compare_regimes(pool, tc, one, eval);
    log_line("seed " + std::to_string(ro.seeds[i]) + ": " + std::to_string(per_seed[i].size()) +
             " rows");
  });
  std::vector<RegimeRow> rows;
  for (auto& r : per_seed) rows.insert(rows.end(), r.begin(), r.end());
  std::ofstream os(run.output("regimes.csv"));
  write_regime_csv(os, rows, run.config_hash());
  os.close();
  std::cout << "rows=" << rows.size() << '\n';
  run.finish();
}

void cmd_experiment_complexity(const GlobalOptions& opts) {
  Json cfg = read_config(opts.config);
  if (opts.seed) cfg["complexity"]["seeds"] = Json::array({*opts.seed});
  check_config_keys(cfg, "", {"spec", "train", "complexity", "configs"});
  RunContext run("experiment complexity", cfg, opts);
  const Json spec_json = require(cfg, "spec");
  const Json train_json = cfg.value("train", Json::object());
  const ComplexityOptions co = parse_complexity_options(cfg.value("complexity", Json()), "complexity");
  run.record_seeds(co.seeds);

  // Each entry overrides k and/or the class count of the base setup.
  Json configs = cfg.value("configs", Json::array({Json::object()}));
  if (!configs.is_array() || configs.empty()) {
    throw ConfigError("configs: expected a non-empty array");
  }
  std::vector<std::pair<GaussianSpec, TrainConfig>> setups;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string path = "configs[" + std::to_string(i) + "]";
    check_config_keys(configs[i], path, {"k", "num_classes"});
    Json s = spec_json;
    Json t = train_json;
    if (configs[i].contains("num_classes")) s["num_classes"] = configs[i]["num_classes"];
    if (configs[i].contains("k")) t["k"] = configs[i]["k"];
    setups.emplace_back(parse_gaussian(s, path + ".spec"), parse_train(t, path + ".train"));
  }

  std::vector<ComplexityResult> results(setups.size());
  run_jobs(setups.size(), run.jobs(), [&](std::size_t i) {
    results[i] = sample_complexity_search(setups[i].first, setups[i].second, co);
    const auto& r = results[i];
    log_line("|C|=" + std::to_string(r.num_classes) + " k=" + std::to_string(r.k) +
             " reached " + std::to_string(r.reached) + "/" + std::to_string(r.seeds.size()) +
             (r.mean_n_eps ? " mean N_eps=" + format_double(*r.mean_n_eps) : std::string()));
  });

  std::ofstream os(run.output("complexity.csv"));
  write_complexity_csv(os, results, run.config_hash());
  os.close();
  Json all = Json::array();
  for (const auto& r : results) all.push_back(to_json(r));
  run.write_json("complexity.json", {{"results", all}});
  std::cout << "configs=" << results.size() << '\n';
  run.finish();
}

}  // namespace uscrl::cli
