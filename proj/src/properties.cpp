// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "calibatlas/error.hpp"
#include "calibatlas/rng.hpp"

namespace calibatlas {

namespace {
constexpr double kValueEqTol = 1e-9;  // metric distance treated as "same value"

void require_embedding(const SpacePtr& space, const char* what) {
  if (!space->has_embedding()) {
    fail(ErrorCode::kMissingEmbedding, std::string(what) + " requires a numeric embedding");
  }
}

double embedding_range(const SpacePtr& space) {
  const auto& e = space->embedding();
  auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  return *hi - *lo;
}

// Indices sorted ascending by embedding value (stable on ties).
std::vector<std::size_t> order_by_embedding(const SpacePtr& space) {
  const auto& e = space->embedding();
  std::vector<std::size_t> idx(e.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return e[a] < e[b]; });
  return idx;
}

double quantile_value(const Pmf& p, double tau, const std::vector<std::size_t>& order) {
  const auto& e = p.space()->embedding();
  double cdf = 0.0;
  for (std::size_t idx : order) {
    cdf += p[idx];
    if (cdf >= tau - 1e-12) return e[idx];
  }
  return e[order.back()];
}
}  // namespace

const char* value_metric_name(ValueMetric metric) {
  switch (metric) {
    case ValueMetric::kAbsDiff: return "abs_diff";
    case ValueMetric::kDiscrete: return "discrete";
    case ValueMetric::kTotalVariation: return "total_variation";
  }
  return "unknown";
}

double value_distance(ValueMetric metric, const PropertyValue& a, const PropertyValue& b) {
  switch (metric) {
    case ValueMetric::kAbsDiff:
      return std::abs(a.real() - b.real());
    case ValueMetric::kDiscrete: {
      if (a.kind() != b.kind()) {
        fail(ErrorCode::kKindMismatch,
             std::string("discrete metric on mixed kinds ") +
                 PropertyValue::kind_name(a.kind()) + " vs " +
                 PropertyValue::kind_name(b.kind()));
      }
      if (!a.is_token() && !a.is_ranking()) {
        fail(ErrorCode::kKindMismatch,
             std::string("discrete metric expects token or ranking values, got ") +
                 PropertyValue::kind_name(a.kind()));
      }
      return a == b ? 0.0 : 1.0;
    }
    case ValueMetric::kTotalVariation:
      return total_variation(a.distribution(), b.distribution());
  }
  fail(ErrorCode::kInternal, "unreachable value metric");
}

PropertyValue evaluate(const Property& prop, const Pmf& p) {
  if (prop.space && !(*prop.space == *p.space())) {
    fail(ErrorCode::kSpaceMismatch,
         "property '" + prop.name + "' evaluated on a different outcome space");
  }
  return prop.evaluator(p);
}

Property make_mean(const SpacePtr& space) {
  require_embedding(space, "mean");
  Property prop;
  prop.name = "mean";
  prop.space = space;
  prop.evaluator = [](const Pmf& p) { return PropertyValue(p.mean()); };
  prop.value_metric = ValueMetric::kAbsDiff;
  prop.lipschitz_k = embedding_range(space);
  prop.convex_level_sets = true;
  return prop;
}

Property make_quantile(const SpacePtr& space, double tau) {
  require_embedding(space, "quantile");
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::kBadParam, "quantile level must lie in (0, 1), got " + std::to_string(tau));
  }
  Property prop;
  prop.name = "quantile(" + std::to_string(tau) + ")";
  prop.space = space;
  auto order = order_by_embedding(space);
  prop.evaluator = [tau, order](const Pmf& p) {
    return PropertyValue(quantile_value(p, tau, order));
  };
  prop.value_metric = ValueMetric::kAbsDiff;
  // The image is exactly the embedding values; expose them as a grid.
  std::vector<double> sorted = space->embedding();
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<PropertyValue> grid;
  for (double v : sorted) grid.emplace_back(v);
  prop.value_grid = std::move(grid);
  prop.convex_level_sets = true;
  return prop;
}

Property make_mode(const SpacePtr& space) {
  Property prop;
  prop.name = "mode";
  prop.space = space;
  prop.evaluator = [space](const Pmf& p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (p[i] > p[best]) best = i;
    }
    return PropertyValue(space->labels()[best]);
  };
  prop.value_metric = ValueMetric::kDiscrete;
  std::vector<PropertyValue> grid;
  for (const auto& label : space->labels()) grid.emplace_back(label);
  prop.value_grid = std::move(grid);
  prop.convex_level_sets = true;
  return prop;
}

Property make_ranking(const SpacePtr& space) {
  Property prop;
  prop.name = "ranking";
  prop.space = space;
  prop.evaluator = [space](const Pmf& p) {
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    std::vector<std::string> labels;
    labels.reserve(idx.size());
    for (std::size_t i : idx) labels.push_back(space->labels()[i]);
    return PropertyValue(std::move(labels));
  };
  prop.value_metric = ValueMetric::kDiscrete;
  prop.convex_level_sets = true;
  return prop;
}

Property make_variance(const SpacePtr& space) {
  require_embedding(space, "variance");
  Property prop;
  prop.name = "variance";
  prop.space = space;
  prop.evaluator = [](const Pmf& p) {
    double mu = p.mean();
    return PropertyValue(p.second_moment() - mu * mu);
  };
  prop.value_metric = ValueMetric::kAbsDiff;
  const auto& e = space->embedding();
  auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  double max_abs = std::max(std::abs(*lo), std::abs(*hi));
  // |var(p)-var(q)| <= range(y^2) TV + 2 max|y| range(y) TV.
  double sq_lo = *lo * *lo, sq_hi = *hi * *hi;
  double sq_range = std::max(sq_lo, sq_hi) - ((*lo <= 0.0 && *hi >= 0.0) ? 0.0 : std::min(sq_lo, sq_hi));
  prop.lipschitz_k = sq_range + 2.0 * max_abs * (*hi - *lo);
  prop.convex_level_sets = false;
  return prop;
}

Property make_cvar(const SpacePtr& space, double tau) {
  require_embedding(space, "cvar");
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::kBadParam, "cvar level must lie in (0, 1), got " + std::to_string(tau));
  }
  Property prop;
  prop.name = "cvar(" + std::to_string(tau) + ")";
  prop.space = space;
  auto order = order_by_embedding(space);
  prop.evaluator = [tau, order](const Pmf& p) {
    const auto& e = p.space()->embedding();
    double v = quantile_value(p, tau, order);
    double excess = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      excess += p[i] * std::max(0.0, e[i] - v);
    }
    return PropertyValue(v + excess / (1.0 - tau));
  };
  prop.value_metric = ValueMetric::kAbsDiff;
  return prop;
}

Property make_ratio_of_expectations(const SpacePtr& space, std::vector<double> g,
                                    std::vector<double> h) {
  if (g.size() != space->size() || h.size() != space->size()) {
    fail(ErrorCode::kLengthMismatch, "ratio_of_expectations: g/h must have one value per outcome");
  }
  for (double hv : h) {
    if (!(hv > 0.0)) {
      fail(ErrorCode::kBadParam, "ratio_of_expectations requires h > 0 everywhere");
    }
  }
  Property prop;
  prop.name = "ratio_of_expectations";
  prop.space = space;
  prop.evaluator = [g = std::move(g), h = std::move(h)](const Pmf& p) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      num += p[i] * g[i];
      den += p[i] * h[i];
    }
    return PropertyValue(num / den);
  };
  prop.value_metric = ValueMetric::kAbsDiff;
  prop.convex_level_sets = true;  // each level set is a hyperplane slice
  return prop;
}

Property make_simple_binary(const SpacePtr& space, double q) {
  if (space->size() != 2) {
    fail(ErrorCode::kNotBinary, "simple binary property requires a 2-outcome space");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    fail(ErrorCode::kBadParam, "simple binary threshold must lie in [0, 1]");
  }
  Property prop;
  prop.name = "simple(" + std::to_string(q) + ")";
  prop.space = space;
  prop.evaluator = [q](const Pmf& p) {
    return PropertyValue(std::string(p[1] > q ? "a" : "b"));
  };
  prop.value_metric = ValueMetric::kDiscrete;
  prop.value_grid = std::vector<PropertyValue>{PropertyValue(std::string("a")),
                                               PropertyValue(std::string("b"))};
  prop.convex_level_sets = true;
  return prop;
}

Property make_full_distribution(const SpacePtr& space) {
  Property prop;
  prop.name = "full_distribution";
  prop.space = space;
  prop.evaluator = [](const Pmf& p) { return PropertyValue(p); };
  prop.value_metric = ValueMetric::kTotalVariation;
  prop.lipschitz_k = 1.0;
  prop.convex_level_sets = true;  // singleton level sets
  return prop;
}

Property refine(const Property& base, const std::string& name,
                const std::function<PropertyValue(const PropertyValue&)>& phi,
                ValueMetric new_metric, std::optional<double> phi_lipschitz) {
  Property prop;
  prop.name = name;
  prop.space = base.space;
  prop.evaluator = [base_eval = base.evaluator, phi](const Pmf& p) {
    return phi(base_eval(p));
  };
  prop.value_metric = new_metric;
  if (base.value_grid) {
    std::vector<PropertyValue> grid;
    for (const auto& v : *base.value_grid) {
      PropertyValue mapped = phi(v);
      if (std::find(grid.begin(), grid.end(), mapped) == grid.end()) {
        grid.push_back(std::move(mapped));
      }
    }
    prop.value_grid = std::move(grid);
  }
  if (phi_lipschitz && base.lipschitz_k && base.value_metric == ValueMetric::kAbsDiff &&
      new_metric == ValueMetric::kAbsDiff) {
    prop.lipschitz_k = *phi_lipschitz * *base.lipschitz_k;
  }
  return prop;
}

ConvexityReport level_set_convexity_check(const Property& prop, std::size_t n_trials,
                                          std::uint64_t seed) {
  if (!prop.space) fail(ErrorCode::kBadParam, "convexity check needs a space-bound property");
  Rng rng(seed);
  const SpacePtr& space = prop.space;
  constexpr std::size_t kRejectionBudget = 64;
  constexpr std::size_t kBisectBudget = 32;

  ConvexityReport report;
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    Pmf p = rng.simplex(space);
    PropertyValue vp = evaluate(prop, p);

    std::optional<Pmf> q;
    for (std::size_t k = 0; k < kRejectionBudget && !q; ++k) {
      Pmf cand = rng.simplex(space);
      if (value_distance(prop.value_metric, vp, evaluate(prop, cand)) <= kValueEqTol) {
        q = std::move(cand);
      }
    }
    if (!q && vp.is_real()) {
      // Bisect along segments between fresh samples until Gamma hits vp.
      double target = vp.real();
      for (std::size_t k = 0; k < kBisectBudget && !q; ++k) {
        Pmf a = rng.simplex(space);
        Pmf b = rng.simplex(space);
        double fa = evaluate(prop, a).real();
        double fb = evaluate(prop, b).real();
        if ((fa - target) * (fb - target) > 0.0) continue;
        double lo = 0.0, hi = 1.0;
        bool lo_is_a = fa <= target;
        for (int it = 0; it < 100; ++it) {
          double mid = 0.5 * (lo + hi);
          Pmf m = mixture({a, b}, {1.0 - mid, mid});
          double fm = evaluate(prop, m).real();
          bool below = lo_is_a ? (fm <= target) : (fm >= target);
          if (below) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        Pmf cand = mixture({a, b}, {1.0 - lo, lo});
        if (std::abs(evaluate(prop, cand).real() - target) <= kValueEqTol) {
          q = std::move(cand);
        }
      }
    }
    if (!q && vp.is_distribution()) {
      q = p;  // level sets of distribution-valued properties are singletons
    }
    if (!q) {
      fail(ErrorCode::kRejectionBudgetExceeded,
           "could not sample a level-set pair for property '" + prop.name + "' (trial " +
               std::to_string(trial) + ")");
    }

    double lambda = rng.uniform();
    Pmf mid = mixture({p, *q}, {1.0 - lambda, lambda});
    PropertyValue vmid = evaluate(prop, mid);
    report.trials = trial + 1;
    if (value_distance(prop.value_metric, vp, vmid) > kValueEqTol) {
      report.convex = false;
      report.witness = ConvexityWitness{p, *q, lambda, vp, vmid};
      return report;
    }
  }
  report.convex = true;
  return report;
}

Property make_standard_property(const SpacePtr& space, const std::string& kind,
                                const PropertyParams& params) {
  auto need_tau = [&]() {
    if (!params.tau) fail(ErrorCode::kBadParam, "property '" + kind + "' requires tau");
    return *params.tau;
  };
  if (kind == "mean") return make_mean(space);
  if (kind == "quantile") return make_quantile(space, need_tau());
  if (kind == "mode") return make_mode(space);
  if (kind == "ranking") return make_ranking(space);
  if (kind == "variance") return make_variance(space);
  if (kind == "cvar") return make_cvar(space, need_tau());
  if (kind == "ratio_of_expectations") {
    if (!params.g || !params.h) {
      fail(ErrorCode::kBadParam, "ratio_of_expectations requires g and h");
    }
    return make_ratio_of_expectations(space, *params.g, *params.h);
  }
  if (kind == "simple_binary") {
    if (!params.q) fail(ErrorCode::kBadParam, "simple_binary requires q");
    return make_simple_binary(space, *params.q);
  }
  if (kind == "full_distribution") return make_full_distribution(space);
  fail(ErrorCode::kBadParam, "unknown property kind '" + kind + "'");
}

}  // namespace calibatlas
