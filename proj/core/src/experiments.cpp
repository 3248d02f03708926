#include "uscrl/experiments.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "uscrl/combinatorics.hpp"
#include "uscrl/error.hpp"

namespace uscrl {

namespace {

RegimeRow row_from(const TrainReport& rep, Regime regime, std::size_t m, std::uint64_t seed,
                   const TrainConfig& cfg) {
  RegimeRow r;
  r.regime = regime;
  r.m_tuples = m;
  r.seed = seed;
  if (!rep.evals.empty()) {
    r.initial_risk = rep.evals.front().risk;
    r.final_risk = rep.evals.back().risk;
    r.risk_std_error = rep.evals.back().risk_std_error;
    r.probe_accuracy = rep.evals.back().probe_accuracy;
  }
  r.final_train_loss = rep.train_loss.back();
  r.loss_clip = cfg.loss.clip;
  r.seconds = rep.seconds;
  return r;
}

}  // namespace

std::vector<RegimeRow> compare_regimes(const LabeledDataset& pool, const TrainConfig& base,
                                       const RegimeOptions& opt, const EvalSource& eval) {
  const std::size_t k = base.k;
  if (opt.n_disjoint == 0) throw PreconditionError("n_disjoint must be >= 1");
  std::vector<RegimeRow> rows;
  for (std::uint64_t seed : opt.seeds) {
    const TupleSet greedy = greedy_iid_tuples(pool, k, {}, derive_seed(seed, 21));
    if (greedy.size() < opt.n_disjoint) {
      throw PreconditionError("pool supports only " + std::to_string(greedy.size()) +
                              " disjoint tuples, " + std::to_string(opt.n_disjoint) + " requested");
    }
    std::vector<std::size_t> pick(greedy.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed, 22));
    for (std::size_t i = pick.size(); i > 1; --i) {
      std::swap(pick[i - 1], pick[static_cast<std::size_t>(uniform_below(i, rng))]);
    }
    pick.resize(opt.n_disjoint);

    // Re-pool the samples of the chosen tuples and remap indices.
    std::vector<SampleIndex> members;
    std::unordered_map<SampleIndex, SampleIndex> remap;
    for (std::size_t r : pick) {
      const auto t = greedy[r];
      auto add = [&](SampleIndex s) {
        if (remap.try_emplace(s, static_cast<SampleIndex>(members.size())).second) members.push_back(s);
      };
      add(t.anchor);
      add(t.positive);
      for (SampleIndex n : t.negatives) add(n);
    }
    const LabeledDataset sub = pool.subset(members);
    TupleSet iid(Regime::IidDisjoint, k);
    std::vector<SampleIndex> negs(k);
    for (std::size_t r : pick) {
      const auto t = greedy[r];
      for (std::size_t i = 0; i < k; ++i) negs[i] = remap.at(t.negatives[i]);
      std::sort(negs.begin(), negs.end());
      iid.push_back(remap.at(t.anchor), remap.at(t.positive), negs, t.class_id);
    }

    TrainConfig cfg = base;
    cfg.seed = seed;
    if (opt.include_iid) {
      cfg.regime = Regime::IidDisjoint;
      rows.push_back(row_from(train(sub, cfg, eval, &iid), Regime::IidDisjoint, iid.size(), seed, cfg));
    }
    for (std::size_t m : opt.m_grid) {
      cfg.regime = Regime::SubSampled;
      cfg.m_tuples = m;
      rows.push_back(row_from(train(sub, cfg, eval), Regime::SubSampled, m, seed, cfg));
    }
    if (opt.include_all) {
      const BigCount count = count_all_tuples(sub, k);
      if (count > 0 && (opt.force_all || count <= base.all_tuples_cap)) {
        TrainConfig all = cfg;
        all.regime = Regime::AllTuples;
        all.force_all_tuples = opt.force_all;
        if (opt.all_steps_per_epoch > 0) all.steps_per_epoch = opt.all_steps_per_epoch;
        rows.push_back(row_from(train(sub, all, eval), Regime::AllTuples,
                                count.convert_to<std::size_t>(), seed, all));
      }
    }
  }
  return rows;
}

ComplexityResult sample_complexity_search(const GaussianSpec& spec, const TrainConfig& base,
                                          const ComplexityOptions& opt) {
  spec.validate();
  if (!(opt.lo < opt.hi)) throw PreconditionError("sample complexity search needs lo < hi");
  if (!(opt.epsilon > 0.0)) throw PreconditionError("epsilon must be > 0");
  if (opt.search_tol == 0) throw PreconditionError("search_tol must be >= 1");

  ComplexityResult res;
  res.k = base.k;
  res.num_classes = spec.num_classes;
  res.epsilon = opt.epsilon;
  const EvalSource eval{spec, std::nullopt};

  auto config_for = [&](std::size_t n, std::uint64_t seed) {
    TrainConfig c = base;
    c.seed = seed;
    c.regime = Regime::SubSampled;
    if (opt.m_equals_n_squared) c.m_tuples = n * n;
    c.run_probe = false;
    return c;
  };

  res.n_ref = opt.ref_multiplier * opt.hi;
  {
    const auto ds = generate_gaussian(spec, res.n_ref, derive_seed(base.seed, 31));
    TrainConfig c = config_for(res.n_ref, base.seed);
    c.epochs = base.epochs * opt.ref_epoch_factor;
    const auto rep = train(ds, c, eval);
    res.reference_risk = rep.final_risk();
    res.reference_std_error = rep.evals.back().risk_std_error;
  }

  double sum = 0.0;
  for (std::uint64_t seed : opt.seeds) {
    SeedSearch ss;
    ss.seed = seed;
    std::map<std::size_t, double> gaps;
    auto gap = [&](std::size_t n) {
      if (auto it = gaps.find(n); it != gaps.end()) return it->second;
      const auto ds = generate_gaussian(spec, n, derive_seed(seed, n));
      const auto rep = train(ds, config_for(n, seed), eval);
      const double g = rep.final_risk() - res.reference_risk;
      gaps[n] = g;
      ss.probes.push_back({n, rep.final_risk(), g});
      return g;
    };
    ss.gap_at_hi = gap(opt.hi);
    if (ss.gap_at_hi <= opt.epsilon) {
      if (gap(opt.lo) <= opt.epsilon) {
        ss.n_eps = opt.lo;
      } else {
        std::size_t l = opt.lo, h = opt.hi;
        while (h - l > opt.search_tol) {
          const std::size_t mid = l + (h - l) / 2;
          if (gap(mid) <= opt.epsilon) {
            h = mid;
          } else {
            l = mid;
          }
        }
        ss.n_eps = h;
      }
      sum += static_cast<double>(*ss.n_eps);
      ++res.reached;
    }
    res.seeds.push_back(std::move(ss));
  }
  if (res.reached > 0) res.mean_n_eps = sum / static_cast<double>(res.reached);
  return res;
}

}  // namespace uscrl
