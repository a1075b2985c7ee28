// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/losses.hpp"

#include <algorithm>
#include <cmath>

#include "calibatlas/error.hpp"
#include "calibatlas/rng.hpp"

namespace calibatlas {

namespace {

void check_kind(const LossFn& loss, const PropertyValue& v) {
  if (v.kind() != loss.value_kind) {
    fail(ErrorCode::kKindMismatch,
         "loss '" + loss.name + "' takes " +
             PropertyValue::kind_name(loss.value_kind) + " decisions, got " +
             PropertyValue::kind_name(v.kind()));
  }
}

void check_space(const SpacePtr& bound, const Pmf& p, const std::string& what) {
  if (bound && !(*bound == *p.space())) {
    fail(ErrorCode::kSpaceMismatch, what + " evaluated on a different outcome space");
  }
}

double trapezoid(const std::function<double(std::size_t, double)>& f, std::size_t y,
                 double a, double b, std::size_t n) {
  double h = (b - a) / static_cast<double>(n);
  double acc = 0.5 * (f(y, a) + f(y, b));
  for (std::size_t i = 1; i < n; ++i) {
    acc += f(y, a + h * static_cast<double>(i));
  }
  return acc * h;
}

}  // namespace

double expected_loss(const LossFn& loss, const Pmf& p, const PropertyValue& v) {
  check_kind(loss, v);
  check_space(loss.space, p, "loss '" + loss.name + "'");
  double acc = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] != 0.0) acc += p[y] * loss.eval(y, v);
  }
  return acc;
}

double expected_identification(const IdentificationFn& v, const Pmf& p, double gamma) {
  check_space(v.space, p, "identification '" + v.name + "'");
  double acc = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] != 0.0) acc += p[y] * v.eval(y, gamma);
  }
  return acc;
}

BestResponse best_response(const LossFn& loss, const Pmf& p,
                           const std::vector<PropertyValue>& grid) {
  if (grid.empty()) fail(ErrorCode::kEmptyGrid, "best response over an empty grid");
  BestResponse best;
  best.index = 0;
  best.value = grid[0];
  best.expected = expected_loss(loss, p, grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double e = expected_loss(loss, p, grid[i]);
    if (e < best.expected) {
      best.index = i;
      best.value = grid[i];
      best.expected = e;
    }
  }
  return best;
}

double loss_bound_over_grid(const LossFn& loss, const std::vector<PropertyValue>& grid) {
  if (grid.empty()) fail(ErrorCode::kEmptyGrid, "loss bound over an empty grid");
  double c = 0.0;
  for (const auto& v : grid) {
    check_kind(loss, v);
    double sum = 0.0;
    for (std::size_t y = 0; y < loss.space->size(); ++y) {
      sum += std::abs(loss.eval(y, v));
    }
    c = std::max(c, sum);
  }
  return c;
}

LossFn loss_from_identification(const IdentificationFn& v, double gamma0,
                                const std::vector<double>& kappa, std::size_t n_quad) {
  if (!v.oriented) {
    fail(ErrorCode::kNotOriented,
         "identification '" + v.name + "' is not oriented; induced loss undefined");
  }
  if (!v.space) fail(ErrorCode::kBadParam, "identification has no outcome space");
  if (!kappa.empty() && kappa.size() != v.space->size()) {
    fail(ErrorCode::kLengthMismatch, "kappa must have one value per outcome");
  }
  if (n_quad == 0) fail(ErrorCode::kBadParam, "n_quad must be positive");

  LossFn loss;
  loss.name = "induced[" + v.name + "]";
  loss.space = v.space;
  loss.value_kind = PropertyValue::Kind::kReal;
  loss.gamma0 = gamma0;
  if (v.integral) {
    auto integral = *v.integral;
    loss.eval = [integral, gamma0, kappa](std::size_t y, const PropertyValue& val) {
      double k = kappa.empty() ? 0.0 : kappa[y];
      return integral(y, gamma0, val.real()) + k;
    };
    loss.quad_error_coeff = 0.0;
  } else {
    auto eval_v = v.eval;
    loss.eval = [eval_v, gamma0, kappa, n_quad](std::size_t y, const PropertyValue& val) {
      double k = kappa.empty() ? 0.0 : kappa[y];
      double g = val.real();
      if (g == gamma0) return k;
      return trapezoid(eval_v, y, gamma0, g, n_quad) + k;
    };
    if (v.lipschitz_m) {
      loss.quad_error_coeff =
          *v.lipschitz_m / (12.0 * static_cast<double>(n_quad) * static_cast<double>(n_quad));
    }
  }
  return loss;
}

ConsistencyReport check_consistency(const LossFn& loss, const Property& prop,
                                    std::size_t n_trials, std::uint64_t seed,
                                    const std::vector<PropertyValue>& grid) {
  if (grid.empty()) fail(ErrorCode::kEmptyGrid, "consistency check needs a decision grid");
  Rng rng(seed);
  ConsistencyReport report;
  for (std::size_t t = 0; t < n_trials; ++t) {
    Pmf p = rng.simplex(prop.space);
    PropertyValue truth = evaluate(prop, p);
    std::vector<PropertyValue> candidates = grid;
    if (truth.kind() == loss.value_kind &&
        std::find(candidates.begin(), candidates.end(), truth) == candidates.end()) {
      candidates.push_back(truth);
    }
    BestResponse br = best_response(loss, p, candidates);
    double gap = value_distance(prop.value_metric, br.value, truth);
    report.trials = t + 1;
    if (gap > report.worst_gap) {
      report.worst_gap = gap;
      if (gap > 1e-6) {
        report.witness = ConsistencyWitness{p, br.value, truth, gap};
      }
    }
  }
  report.consistent = report.worst_gap <= 1e-6;
  return report;
}

LossFn make_squared_loss(const SpacePtr& space) {
  if (!space->has_embedding()) {
    fail(ErrorCode::kMissingEmbedding, "squared loss requires a numeric embedding");
  }
  LossFn loss;
  loss.name = "squared";
  loss.space = space;
  loss.value_kind = PropertyValue::Kind::kReal;
  loss.eval = [space](std::size_t y, const PropertyValue& v) {
    double d = space->value_of(y) - v.real();
    return d * d;
  };
  return loss;
}

LossFn make_pinball_loss(const SpacePtr& space, double tau) {
  if (!space->has_embedding()) {
    fail(ErrorCode::kMissingEmbedding, "pinball loss requires a numeric embedding");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::kBadParam, "pinball level must lie in (0, 1)");
  }
  LossFn loss;
  loss.name = "pinball(" + std::to_string(tau) + ")";
  loss.space = space;
  loss.value_kind = PropertyValue::Kind::kReal;
  loss.eval = [space, tau](std::size_t y, const PropertyValue& v) {
    double yy = space->value_of(y);
    double g = v.real();
    return (1.0 - tau) * std::max(g - yy, 0.0) + tau * std::max(yy - g, 0.0);
  };
  return loss;
}

LossFn make_zero_one_loss(const SpacePtr& space) {
  LossFn loss;
  loss.name = "zero_one";
  loss.space = space;
  loss.value_kind = PropertyValue::Kind::kToken;
  loss.eval = [space](std::size_t y, const PropertyValue& v) {
    const std::string& token = v.token();
    if (!space->contains(token)) {
      fail(ErrorCode::kBadParam, "zero-one decision '" + token + "' is not an outcome label");
    }
    return space->labels()[y] == token ? 0.0 : 1.0;
  };
  loss.bound_c = static_cast<double>(space->size()) - 1.0;
  return loss;
}

SimpleLossPair make_simple_loss(const SpacePtr& space, double q) {
  if (space->size() != 2) {
    fail(ErrorCode::kNotBinary, "simple loss requires a 2-outcome space");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    fail(ErrorCode::kBadParam, "simple loss parameter must lie in [0, 1]");
  }
  SimpleLossPair pair;
  pair.loss.name = "simple(" + std::to_string(q) + ")";
  pair.loss.space = space;
  pair.loss.value_kind = PropertyValue::Kind::kToken;
  pair.loss.eval = [q](std::size_t y, const PropertyValue& v) {
    const std::string& c = v.token();
    if (c == "a") return y == 0 ? q : 0.0;
    if (c == "b") return y == 1 ? 1.0 - q : 0.0;
    fail(ErrorCode::kBadParam, "simple loss decision must be 'a' or 'b', got '" + c + "'");
  };
  pair.loss.bound_c = 2.0 * std::max(q, 1.0 - q);
  pair.property = make_simple_binary(space, q);
  pair.grid = {PropertyValue(std::string("a")), PropertyValue(std::string("b"))};
  return pair;
}

BayesPair make_bayes_pair(const LossFn& loss, const std::vector<PropertyValue>& grid,
                          const std::string& name) {
  if (grid.empty()) fail(ErrorCode::kEmptyGrid, "Bayes pair needs a decision grid");
  BayesPair pair;
  pair.loss = loss;
  pair.grid = grid;

  ValueMetric metric = ValueMetric::kAbsDiff;
  switch (loss.value_kind) {
    case PropertyValue::Kind::kReal: metric = ValueMetric::kAbsDiff; break;
    case PropertyValue::Kind::kToken:
    case PropertyValue::Kind::kRanking: metric = ValueMetric::kDiscrete; break;
    case PropertyValue::Kind::kDistribution: metric = ValueMetric::kTotalVariation; break;
  }

  pair.phi.name = "phi[" + name + "]";
  pair.phi.space = loss.space;
  pair.phi.evaluator = [loss, grid](const Pmf& p) {
    return best_response(loss, p, grid).value;
  };
  pair.phi.value_metric = metric;
  pair.phi.value_grid = grid;

  pair.theta.name = "theta[" + name + "]";
  pair.theta.space = loss.space;
  pair.theta.evaluator = [loss, grid](const Pmf& p) {
    return PropertyValue(best_response(loss, p, grid).expected);
  };
  pair.theta.value_metric = ValueMetric::kAbsDiff;
  return pair;
}

IdentificationFn make_mean_identification(const SpacePtr& space) {
  if (!space->has_embedding()) {
    fail(ErrorCode::kMissingEmbedding, "mean identification requires a numeric embedding");
  }
  IdentificationFn v;
  v.name = "mean";
  v.space = space;
  v.eval = [space](std::size_t y, double gamma) { return gamma - space->value_of(y); };
  v.lipschitz_m = 1.0;
  v.nonconstant_n = 1.0;
  v.integral = [space](std::size_t y, double a, double b) {
    return 0.5 * (b * b - a * a) - space->value_of(y) * (b - a);
  };
  return v;
}

IdentificationFn make_quantile_identification(const SpacePtr& space, double tau) {
  if (!space->has_embedding()) {
    fail(ErrorCode::kMissingEmbedding, "quantile identification requires a numeric embedding");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::kBadParam, "quantile level must lie in (0, 1)");
  }
  IdentificationFn v;
  v.name = "quantile(" + std::to_string(tau) + ")";
  v.space = space;
  v.eval = [space, tau](std::size_t y, double gamma) {
    double yy = space->value_of(y);
    if (yy < gamma) return 1.0 - tau;
    if (yy > gamma) return -tau;
    return 0.0;
  };
  // Piecewise constant in r with a single step at r = y; integrate exactly.
  v.integral = [space, tau](std::size_t y, double a, double b) {
    double sign = 1.0;
    if (a > b) {
      std::swap(a, b);
      sign = -1.0;
    }
    double yy = space->value_of(y);
    double below = std::max(0.0, std::min(b, yy) - a);   // r < y: V = -tau
    double above = std::max(0.0, b - std::max(a, yy));   // r > y: V = 1 - tau
    return sign * ((1.0 - tau) * above - tau * below);
  };
  return v;
}

IdentificationFn make_ratio_identification(const SpacePtr& space, std::vector<double> g,
                                           std::vector<double> h) {
  if (g.size() != space->size() || h.size() != space->size()) {
    fail(ErrorCode::kLengthMismatch, "ratio identification: g/h must have one value per outcome");
  }
  double h_min = h[0], h_max = h[0];
  for (double hv : h) {
    if (!(hv > 0.0)) fail(ErrorCode::kBadParam, "ratio identification requires h > 0");
    h_min = std::min(h_min, hv);
    h_max = std::max(h_max, hv);
  }
  IdentificationFn v;
  v.name = "ratio";
  v.space = space;
  v.eval = [g, h](std::size_t y, double gamma) { return h[y] * gamma - g[y]; };
  v.nonconstant_n = h_min;
  v.lipschitz_m = h_max;
  v.integral = [g, h](std::size_t y, double a, double b) {
    return 0.5 * h[y] * (b * b - a * a) - g[y] * (b - a);
  };
  return v;
}

IdentificationFn make_variance_on_mean_level(const SpacePtr& space, double v_level) {
  if (!space->has_embedding()) {
    fail(ErrorCode::kMissingEmbedding, "variance identification requires a numeric embedding");
  }
  IdentificationFn v;
  v.name = "variance_on_mean_level(" + std::to_string(v_level) + ")";
  v.space = space;
  v.eval = [space, v_level](std::size_t y, double gamma) {
    double yy = space->value_of(y);
    return gamma - (yy * yy - v_level * v_level);
  };
  v.lipschitz_m = 1.0;
  v.nonconstant_n = 1.0;
  v.integral = [space, v_level](std::size_t y, double a, double b) {
    double yy = space->value_of(y);
    double c = yy * yy - v_level * v_level;
    return 0.5 * (b * b - a * a) - c * (b - a);
  };
  return v;
}

IdentificationFn make_cvar_on_quantile_level(const SpacePtr& space, double v_level,
                                             double tau) {
  if (!space->has_embedding()) {
    fail(ErrorCode::kMissingEmbedding, "cvar identification requires a numeric embedding");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::kBadParam, "cvar level must lie in (0, 1)");
  }
  IdentificationFn v;
  v.name = "cvar_on_quantile_level(" + std::to_string(v_level) + ")";
  v.space = space;
  v.eval = [space, v_level, tau](std::size_t y, double gamma) {
    double yy = space->value_of(y);
    return gamma - v_level - std::max(0.0, yy - v_level) / (1.0 - tau);
  };
  v.lipschitz_m = 1.0;
  v.nonconstant_n = 1.0;
  v.integral = [space, v_level, tau](std::size_t y, double a, double b) {
    double yy = space->value_of(y);
    double c = v_level + std::max(0.0, yy - v_level) / (1.0 - tau);
    return 0.5 * (b * b - a * a) - c * (b - a);
  };
  return v;
}

RegularityEstimate estimate_identification_regularity(const IdentificationFn& v,
                                                      const Property& prop,
                                                      std::size_t n_trials,
                                                      std::uint64_t seed,
                                                      const std::vector<double>& gamma_grid) {
  if (gamma_grid.empty()) fail(ErrorCode::kEmptyGrid, "regularity estimate needs a gamma grid");
  Rng rng(seed);
  RegularityEstimate est;
  bool first = true;
  for (std::size_t t = 0; t < n_trials; ++t) {
    Pmf p = rng.simplex(prop.space);
    double truth = evaluate(prop, p).real();
    for (double gamma : gamma_grid) {
      double diff = gamma - truth;
      if (std::abs(diff) <= 1e-6) continue;
      double vbar = expected_identification(v, p, gamma);
      if (vbar * diff < 0.0 || vbar == 0.0) est.oriented_ok = false;
      double ratio = std::abs(vbar) / std::abs(diff);
      if (first) {
        est.n_hat = est.m_hat = ratio;
        first = false;
      } else {
        est.n_hat = std::min(est.n_hat, ratio);
        est.m_hat = std::max(est.m_hat, ratio);
      }
      ++est.samples;
    }
  }
  if (est.samples == 0) {
    fail(ErrorCode::kBadParam, "regularity estimate: every grid point fell within 1e-6 of the property value");
  }
  return est;
}

}  // namespace calibatlas
