// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "calibatlas/error.hpp"
#include "calibatlas/rng.hpp"
#include "calibatlas/verify.hpp"

namespace calibatlas {
namespace {

// A latent input: one conditional outcome distribution shared by all records
// expanded from it, plus the predictions and group flags attached to it.
struct Unit {
  std::string x_id;
  std::map<std::string, PropertyValue> preds;
  std::map<std::string, bool> groups;
  std::vector<double> cond;
  double weight = 1.0;
};

PredictionDataset units_to_dataset(const std::string& id, const SpacePtr& space,
                                   const std::vector<Unit>& units) {
  std::vector<Record> records;
  for (const auto& u : units) {
    for (std::size_t y = 0; y < u.cond.size(); ++y) {
      if (u.cond[y] <= 0.0) continue;
      Record r;
      r.x_id = u.x_id;
      r.y = y;
      r.predictions = u.preds;
      r.groups = u.groups;
      r.weight = u.weight * u.cond[y];
      records.push_back(std::move(r));
    }
  }
  return PredictionDataset(id, space, std::move(records));
}

std::string unit_id(std::size_t i) { return "x" + std::to_string(i); }

// Simplex sample with every component bounded away from zero.
std::vector<double> interior_weights(Rng& rng, std::size_t k) {
  std::vector<double> w = rng.simplex_weights(k);
  for (double& x : w) x = (x + 0.1 / static_cast<double>(k)) / 1.1;
  return w;
}

double min_component(const std::vector<double>& w) {
  return *std::min_element(w.begin(), w.end());
}

// Zero-sum (componentwise, exactly in expectation and to rounding in floating
// point) perturbations for m units around a shared base; `margin` is the
// smallest base component, which bounds every perturbation.
std::vector<std::vector<double>> zero_sum_noise(Rng& rng, std::size_t k, std::size_t m,
                                                double margin) {
  std::vector<std::vector<double>> delta(m, std::vector<double>(k, 0.0));
  if (m < 2 || margin <= 0.0) return delta;
  double s = 0.8 * margin / static_cast<double>(m);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    std::size_t a = rng.integer(k);
    std::size_t b = rng.integer(k);
    while (b == a) b = rng.integer(k);
    double eps = rng.uniform(0.0, s);
    delta[i][a] += eps;
    delta[i][b] -= eps;
  }
  for (std::size_t y = 0; y < k; ++y) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) acc += delta[i][y];
    delta[m - 1][y] = -acc;
  }
  return delta;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// Bias vector q*(e_a - e_b); componentwise sum is exactly zero.
std::vector<double> pair_bias(Rng& rng, std::size_t k, double t) {
  std::vector<double> bias(k, 0.0);
  std::size_t a = rng.integer(k);
  std::size_t b = rng.integer(k);
  while (b == a) b = rng.integer(k);
  bias[a] += t;
  bias[b] -= t;
  return bias;
}

std::vector<PropertyValue> real_grid(const std::vector<double>& values) {
  std::vector<PropertyValue> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(PropertyValue(v));
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

std::vector<PropertyValue> label_grid(const SpacePtr& space) {
  std::vector<PropertyValue> out;
  for (const auto& l : space->labels()) out.push_back(PropertyValue(l));
  return out;
}

// Distinct reals with a minimal pairwise separation.
std::vector<double> separated_reals(Rng& rng, std::size_t n, double lo, double hi,
                                    double sep) {
  std::vector<double> out;
  std::size_t budget = 1000;
  while (out.size() < n && budget-- > 0) {
    double v = rng.uniform(lo, hi);
    bool ok = true;
    for (double u : out) {
      if (std::abs(u - v) < sep) ok = false;
    }
    if (ok) out.push_back(v);
  }
  if (out.size() < n) {
    fail(ErrorCode::kRejectionBudgetExceeded, "could not sample separated reals");
  }
  return out;
}

// --- families of exactly / biased distribution-calibrated datasets ----------

struct DistFamily {
  std::vector<Unit> units;
  std::vector<Pmf> predictions;          // one per level
  std::vector<double> planted_alpha;     // max-component bias per level
};

// Levels are distinct predicted pmfs; each level has `members` units sharing
// the prediction, with conditionals base + bias + zero-sum noise. With zero
// bias the dataset is exactly distribution calibrated with respect to every
// property of the prediction.
DistFamily make_dist_family(Rng& rng, const SpacePtr& space, std::size_t n_levels,
                            bool biased, const std::vector<Pmf>* forced_predictions) {
  DistFamily fam;
  std::size_t k = space->size();
  for (std::size_t j = 0; j < n_levels; ++j) {
    Pmf p = forced_predictions ? (*forced_predictions)[j] : Pmf(space, interior_weights(rng, k));
    std::size_t m = 1 + rng.integer(3);
    double t = biased && rng.uniform() < 0.8
                   ? rng.uniform(0.05, 0.4) * min_component(p.weights())
                   : 0.0;
    std::vector<double> bias = pair_bias(rng, k, t);
    std::vector<double> base = add(p.weights(), bias);
    auto noise = zero_sum_noise(rng, k, m, min_component(base));
    for (std::size_t i = 0; i < m; ++i) {
      Unit u;
      u.x_id = unit_id(fam.units.size());
      u.preds.emplace("f", PropertyValue(p));
      u.cond = add(base, noise[i]);
      fam.units.push_back(std::move(u));
    }
    fam.predictions.push_back(p);
    double alpha = 0.0;
    for (double b : bias) alpha = std::max(alpha, std::abs(b));
    fam.planted_alpha.push_back(alpha);
  }
  return fam;
}

// Pmf on a 3-outcome space whose probability ranking equals `order` with
// strictly separated components.
Pmf ranked_pmf(Rng& rng, const SpacePtr& space, const std::vector<std::size_t>& order) {
  std::vector<double> w;
  std::size_t budget = 200;
  while (budget-- > 0) {
    w = interior_weights(rng, space->size());
    std::sort(w.begin(), w.end(), std::greater<double>());
    bool ok = true;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i] - w[i + 1] < 0.02) ok = false;
    }
    if (ok) break;
  }
  std::vector<double> out(space->size());
  for (std::size_t i = 0; i < order.size(); ++i) out[order[i]] = w[i];
  return Pmf(space, out);
}

std::vector<std::size_t> random_order(Rng& rng, std::size_t k) {
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = k; i > 1; --i) {
    std::size_t j = rng.integer(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// --- per-edge generators ------------------------------------------------------

Scenario gen_dist_implies_gamma(Rng& rng, std::size_t index, bool biased) {
  SpacePtr space = make_numeric_space(3);
  Scenario s;
  std::size_t n_levels = 2 + rng.integer(3);
  std::size_t which = index % 3;
  std::vector<Pmf> forced;
  if (which == 0) {
    // Several predictions per mode so property levels merge distinct pmfs.
    for (std::size_t j = 0; j < n_levels; ++j) {
      std::size_t top = rng.integer(3);
      std::vector<std::size_t> order = random_order(rng, 3);
      auto it = std::find(order.begin(), order.end(), top);
      std::iter_swap(order.begin(), it);
      forced.push_back(ranked_pmf(rng, space, order));
    }
  }
  DistFamily fam =
      make_dist_family(rng, space, n_levels, biased, which == 0 ? &forced : nullptr);
  s.dataset = units_to_dataset(s.name, space, fam.units);
  Property prop = which == 0   ? make_mode(space)
                  : which == 1 ? make_mean(space)
                               : make_full_distribution(space);
  if (biased && which == 0) {
    // Discrete property: the approximate statement needs a Lipschitz real
    // property, so the biased variant always uses the mean.
    prop = make_mean(space);
  }
  s.properties.emplace("gamma", std::move(prop));
  return s;
}

Scenario gen_dist_implies_gamma_approx(Rng& rng, std::size_t index) {
  SpacePtr space = make_numeric_space(3);
  Scenario s;
  DistFamily fam = make_dist_family(rng, space, 2 + rng.integer(3), true, nullptr);
  s.dataset = units_to_dataset(s.name, space, fam.units);
  std::size_t which = index % 2;
  if (which == 0) {
    s.properties.emplace("gamma", make_mean(space));
  } else {
    double a = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.5, 2.0);
    double b = rng.uniform(-1.0, 1.0);
    Property base = make_mean(space);
    Property scaled = refine(
        base, "affine_mean",
        [a, b](const PropertyValue& v) { return PropertyValue(a * v.real() + b); },
        ValueMetric::kAbsDiff, std::abs(a));
    scaled.convex_level_sets = true;  // affine image of mean level sets
    s.properties.emplace("gamma", std::move(scaled));
  }
  return s;
}

void add_decision_losses(Scenario& s, Rng& rng, const SpacePtr& space, std::size_t which) {
  if (which == 0) {
    LossFn sq = make_squared_loss(space);
    std::vector<double> e = space->embedding();
    std::vector<PropertyValue> grid =
        real_grid(linspace(*std::min_element(e.begin(), e.end()),
                           *std::max_element(e.begin(), e.end()), 9));
    BayesPair pair = make_bayes_pair(sq, grid, "sq");
    s.properties.emplace("gamma", pair.phi);
    s.losses.emplace("sq", ScenarioLoss{std::move(sq), std::move(grid), std::nullopt});
  } else if (which == 1) {
    LossFn zo = make_zero_one_loss(space);
    std::vector<PropertyValue> grid = label_grid(space);
    BayesPair pair = make_bayes_pair(zo, grid, "zo");
    s.properties.emplace("gamma", pair.phi);
    s.losses.emplace("zo", ScenarioLoss{std::move(zo), std::move(grid), std::nullopt});
  } else {
    double q = rng.uniform(0.2, 0.8);
    SimpleLossPair pair = make_simple_loss(space, q);
    s.properties.emplace("gamma", pair.property);
    s.losses.emplace("lq", ScenarioLoss{std::move(pair.loss), std::move(pair.grid),
                                        std::nullopt});
  }
}

Scenario gen_dist_implies_decision(Rng& rng, std::size_t index, bool biased) {
  std::size_t which = index % 3;
  SpacePtr space = which == 2 ? make_numeric_space(2) : make_numeric_space(3);
  Scenario s;
  DistFamily fam = make_dist_family(rng, space, 2 + rng.integer(3), biased, nullptr);
  s.dataset = units_to_dataset(s.name, space, fam.units);
  add_decision_losses(s, rng, space, which);
  return s;
}

Scenario gen_gamma_iff_swap(Rng& rng, std::size_t index, double forced_alpha) {
  SpacePtr space = make_numeric_space(2);
  Scenario s;
  bool mean_case = index % 2 == 0;
  std::size_t k = 2 + rng.integer(3);
  double alpha = forced_alpha;
  if (alpha < 0.0) {
    const double choices[4] = {0.01, 0.05, 0.1, 0.2};
    alpha = choices[(index / 2) % 4];
  }
  std::vector<Unit> units;
  std::vector<double> grid_values;
  if (mean_case) {
    std::vector<double> gammas = separated_reals(rng, k, 0.25, 0.75, 0.02);
    for (std::size_t j = 0; j < k; ++j) {
      double m = gammas[j] + (rng.coin() ? alpha : -alpha);
      Unit u;
      u.x_id = unit_id(j);
      u.preds.emplace("f", PropertyValue(gammas[j]));
      u.cond = {1.0 - m, m};
      units.push_back(std::move(u));
      grid_values.push_back(m);
    }
    IdentificationFn v = make_mean_identification(space);
    for (double g : linspace(0.0, 1.0, 5)) grid_values.push_back(g);
    std::vector<PropertyValue> grid = real_grid(grid_values);
    s.properties.emplace("gamma", make_mean(space));
    s.losses.emplace("loss", ScenarioLoss{loss_from_identification(v, 0.0, {}, 64), grid,
                                          std::nullopt});
    s.idents.emplace("V", ScenarioIdent{std::move(v), 0.0, 64, grid});
    double half_sq = 0.5 * alpha * alpha;
    s.expected.push_back(ExpectedQuantity{"swap_sup", "agg:sup:swap:f:loss", half_sq, 1e-9,
                                          "planted offset, induced quadratic loss"});
    s.expected.push_back(ExpectedQuantity{"swap_expected", "agg:expected:swap:f:loss",
                                          half_sq, 1e-9,
                                          "equal offset at every level"});
    s.expected.push_back(ExpectedQuantity{"gamma_sup", "agg:sup:gamma:f:gamma", alpha, 1e-9,
                                          "planted offset"});
  } else {
    std::vector<double> g = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    std::vector<double> h = {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    if (std::abs(g[1] * h[0] - g[0] * h[1]) < 0.1) g[1] += 0.5;
    Property prop = make_ratio_of_expectations(space, g, h);
    std::vector<double> gammas;
    std::size_t budget = 500;
    std::vector<Unit> tmp;
    while (tmp.size() < k && budget-- > 0) {
      double x = rng.uniform(0.05, 0.95);
      double t = (g[0] * (1.0 - x) + g[1] * x) / (h[0] * (1.0 - x) + h[1] * x);
      double gamma = t + (rng.coin() ? alpha : -alpha);
      bool ok = true;
      for (double other : gammas) {
        if (std::abs(other - gamma) < 1e-3) ok = false;
      }
      if (!ok) continue;
      Unit u;
      u.x_id = unit_id(tmp.size());
      u.preds.emplace("f", PropertyValue(gamma));
      u.cond = {1.0 - x, x};
      tmp.push_back(std::move(u));
      gammas.push_back(gamma);
      grid_values.push_back(t);
    }
    if (tmp.size() < k) fail(ErrorCode::kRejectionBudgetExceeded, "ratio level sampling");
    units = std::move(tmp);
    IdentificationFn v = make_ratio_identification(space, g, h);
    std::vector<PropertyValue> grid = real_grid(grid_values);
    s.properties.emplace("gamma", std::move(prop));
    s.losses.emplace("loss", ScenarioLoss{loss_from_identification(v, 0.0, {}, 64), grid,
                                          std::nullopt});
    s.idents.emplace("V", ScenarioIdent{std::move(v), 0.0, 64, grid});
  }
  s.dataset = units_to_dataset(s.name, space, units);
  return s;
}

Scenario gen_gamma_inherited(Rng& rng, std::size_t index) {
  SpacePtr space = make_numeric_space(2);
  Scenario s;
  bool exact = index % 2 == 0;
  std::size_t k = 3 + rng.integer(3);
  std::vector<double> gammas = separated_reals(rng, k, 0.1, 0.9, 0.03);
  std::sort(gammas.begin(), gammas.end());
  // Threshold above at least two levels so the clamp merges them.
  double t = rng.uniform(gammas[1] + 0.01, std::min(0.95, gammas.back() + 0.05));
  std::vector<Unit> units;
  for (std::size_t j = 0; j < k; ++j) {
    double off = exact ? 0.0 : (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.01, 0.1);
    double m = std::clamp(gammas[j] + off, 0.02, 0.98);
    Unit u;
    u.x_id = unit_id(j);
    u.preds.emplace("f", PropertyValue(gammas[j]));
    u.cond = {1.0 - m, m};
    u.weight = 1.0 + rng.uniform();
    units.push_back(std::move(u));
  }
  s.dataset = units_to_dataset(s.name, space, units);
  Property base = make_mean(space);
  auto clamp_fn = [t](const PropertyValue& v) {
    return PropertyValue(std::max(v.real(), t));
  };
  Property phi = refine(base, "clamped_mean", clamp_fn, ValueMetric::kAbsDiff, 1.0);
  phi.convex_level_sets = true;  // sub-level set plus singleton level sets
  s.properties.emplace("gamma", std::move(base));
  s.properties.emplace("phi", std::move(phi));
  s.refinements.push_back(Refinement{"f", "gamma", "phi", clamp_fn, 1.0});
  return s;
}

Scenario gen_dist_inherited(Rng& rng, std::size_t index) {
  SpacePtr space = make_numeric_space(3);
  Scenario s;
  bool exact = index % 2 == 0;
  std::size_t n_levels = 3 + rng.integer(3);
  std::vector<Pmf> forced;
  for (std::size_t j = 0; j < n_levels; ++j) {
    forced.push_back(ranked_pmf(rng, space, random_order(rng, 3)));
  }
  DistFamily fam = make_dist_family(rng, space, n_levels, !exact, &forced);
  s.dataset = units_to_dataset(s.name, space, fam.units);
  s.properties.emplace("gamma", make_ranking(space));
  s.properties.emplace("phi", make_mode(space));
  auto first_of_ranking = [](const PropertyValue& v) {
    return PropertyValue(v.ranking().front());
  };
  s.refinements.push_back(Refinement{"f", "gamma", "phi", first_of_ranking, std::nullopt});
  return s;
}

Scenario gen_swap_for_refined(Rng& rng, std::size_t index) {
  SpacePtr space = make_numeric_space(3);
  Scenario s;
  bool exact = index % 2 == 0;
  std::size_t n_levels = 3 + rng.integer(3);
  std::vector<Pmf> forced;
  for (std::size_t j = 0; j < n_levels; ++j) {
    forced.push_back(ranked_pmf(rng, space, random_order(rng, 3)));
  }
  DistFamily fam = make_dist_family(rng, space, n_levels, !exact, &forced);
  s.dataset = units_to_dataset(s.name, space, fam.units);
  s.properties.emplace("gamma", make_full_distribution(space));
  s.properties.emplace("phi", make_mode(space));
  LossFn zo = make_zero_one_loss(space);
  // Bounded loss against the full-distribution property under total
  // variation: |l(P,v) - l(P',v)| <= sup|l| * sum |P-P'| = 2 sup|l| * TV.
  s.losses.emplace("zo", ScenarioLoss{std::move(zo), label_grid(space), 2.0});
  auto mode_of = [space](const PropertyValue& v) {
    const Pmf& p = v.distribution();
    std::size_t best = 0;
    for (std::size_t y = 1; y < p.size(); ++y) {
      if (p[y] > p[best]) best = y;
    }
    return PropertyValue(space->labels()[best]);
  };
  s.refinements.push_back(Refinement{"f", "gamma", "phi", mode_of, std::nullopt});
  return s;
}

Scenario gen_decision_implies_bayes(Rng& rng, std::size_t index) {
  std::size_t which = index % 2;
  SpacePtr space = which == 0 ? make_numeric_space(2) : make_numeric_space(3);
  Scenario s;
  std::size_t n_levels = 2 + rng.integer(3);
  // Arbitrary (generally miscalibrated) conditionals: the implication is an
  // identity between the two metrics, not a calibration assumption.
  std::vector<Unit> units;
  for (std::size_t j = 0; j < n_levels; ++j) {
    Pmf p(space, interior_weights(rng, space->size()));
    std::size_t m = 1 + rng.integer(2);
    for (std::size_t i = 0; i < m; ++i) {
      Unit u;
      u.x_id = unit_id(units.size());
      u.preds.emplace("f", PropertyValue(p));
      u.cond = interior_weights(rng, space->size());
      u.weight = 0.5 + rng.uniform();
      units.push_back(std::move(u));
    }
  }
  s.dataset = units_to_dataset(s.name, space, units);
  LossFn sq = make_squared_loss(space);
  std::vector<double> e = space->embedding();
  s.losses.emplace("sq", ScenarioLoss{std::move(sq),
                                      real_grid(linspace(e.front(), e.back(), 9)),
                                      std::nullopt});
  if (which == 0) {
    SimpleLossPair pair = make_simple_loss(space, rng.uniform(0.2, 0.8));
    s.losses.emplace("lq",
                     ScenarioLoss{std::move(pair.loss), std::move(pair.grid), std::nullopt});
  } else {
    LossFn zo = make_zero_one_loss(space);
    s.losses.emplace("zo", ScenarioLoss{std::move(zo), label_grid(space), std::nullopt});
  }
  return s;
}

Scenario gen_selfreal_implies_precise(Rng& rng, std::size_t index) {
  SpacePtr space = make_numeric_space(3);
  Scenario s;
  bool exact = index % 2 == 0;
  LossFn sq = make_squared_loss(space);
  std::vector<PropertyValue> grid = real_grid(linspace(0.0, 2.0, 41));
  std::size_t k = 2 + rng.integer(3);
  std::vector<Unit> units;
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t m = 1 + rng.integer(2);
    std::vector<std::vector<double>> conds;
    std::vector<double> pooled(space->size(), 0.0);
    std::size_t budget = 100;
    while (budget-- > 0) {
      conds.clear();
      std::fill(pooled.begin(), pooled.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        conds.push_back(interior_weights(rng, space->size()));
        for (std::size_t y = 0; y < pooled.size(); ++y) pooled[y] += conds[i][y];
      }
      for (double& x : pooled) x /= static_cast<double>(m);
      // Keep the pooled mean away from grid midpoints so the argmin is
      // stable under record-order rounding.
      double mean = pooled[1] + 2.0 * pooled[2];
      double cell = 2.0 / 40.0;
      double frac = std::abs(mean / cell - std::floor(mean / cell) - 0.5);
      if (frac > 1e-3) break;
    }
    BestResponse br = best_response(sq, Pmf(space, pooled), grid);
    double offset =
        exact ? 0.0 : (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.01, 0.3);
    double phi = br.value.real();
    double theta = br.expected + offset;
    for (std::size_t i = 0; i < m; ++i) {
      Unit u;
      u.x_id = unit_id(units.size());
      u.preds.emplace("g", PropertyValue(phi));
      u.preds.emplace("h", PropertyValue(theta));
      u.cond = conds[i];
      units.push_back(std::move(u));
    }
  }
  s.dataset = units_to_dataset(s.name, space, units);
  s.losses.emplace("sq", ScenarioLoss{std::move(sq), std::move(grid), std::nullopt});
  return s;
}

Scenario gen_decision_equiv_vanilla(Rng& rng, std::size_t index) {
  SpacePtr space = make_numeric_space(2);
  Scenario s;
  bool calibrated = index % 2 == 0;
  std::size_t k = 2 + rng.integer(4);
  std::vector<double> gammas = separated_reals(rng, k, 0.05, 0.95, 0.05);
  std::vector<Unit> units;
  bool any_offset = false;
  for (std::size_t j = 0; j < k; ++j) {
    double m = gammas[j];
    if (!calibrated && (rng.coin() || (j + 1 == k && !any_offset))) {
      double dir = gammas[j] > 0.5 ? -1.0 : 1.0;
      m = gammas[j] + dir * rng.uniform(0.05, 0.2);
      any_offset = true;
    }
    Unit u;
    u.x_id = unit_id(j);
    u.preds.emplace("fmean", PropertyValue(gammas[j]));
    u.preds.emplace("f", PropertyValue(Pmf(space, {1.0 - gammas[j], gammas[j]})));
    u.cond = {1.0 - m, m};
    units.push_back(std::move(u));
  }
  s.dataset = units_to_dataset(s.name, space, units);
  return s;
}

}  // namespace

Scenario make_edge_scenario(EdgeKind kind, std::uint64_t seed, std::size_t index) {
  Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(kind) * 1315423911ull + index));
  Scenario s;
  switch (kind) {
    case EdgeKind::kDistImpliesGamma:
      s = gen_dist_implies_gamma(rng, index, false);
      break;
    case EdgeKind::kDistImpliesGammaApprox:
      s = gen_dist_implies_gamma_approx(rng, index);
      break;
    case EdgeKind::kDistImpliesDecision:
      s = gen_dist_implies_decision(rng, index, false);
      break;
    case EdgeKind::kDistImpliesDecisionApprox:
      s = gen_dist_implies_decision(rng, index, true);
      break;
    case EdgeKind::kGammaIffSwap:
      s = gen_gamma_iff_swap(rng, index, -1.0);
      break;
    case EdgeKind::kGammaInherited:
      s = gen_gamma_inherited(rng, index);
      break;
    case EdgeKind::kDistInherited:
      s = gen_dist_inherited(rng, index);
      break;
    case EdgeKind::kSwapForRefined:
      s = gen_swap_for_refined(rng, index);
      break;
    case EdgeKind::kDecisionImpliesBayes:
      s = gen_decision_implies_bayes(rng, index);
      break;
    case EdgeKind::kSelfrealImpliesPrecise:
      s = gen_selfreal_implies_precise(rng, index);
      break;
    case EdgeKind::kDecisionEquivVanillaBinary:
      s = gen_decision_equiv_vanilla(rng, index);
      break;
  }
  s.name = edge_by_name(all_edges()[static_cast<std::size_t>(kind)].name).name + "[" +
           std::to_string(index) + "]";
  if (s.dataset) {
    // Rebuild with the final name as the dataset id.
    s.dataset = PredictionDataset(s.name, s.dataset->space(),
                                  std::vector<Record>(s.dataset->records()));
  }
  return s;
}

// --- counterexamples ----------------------------------------------------------

Scenario counterexample_half_predictor(double p_bar, std::size_t n_inputs) {
  if (!(p_bar > 0.0 && p_bar < 1.0)) fail(ErrorCode::kBadParam, "p_bar must be in (0, 1)");
  if (n_inputs == 0) fail(ErrorCode::kBadParam, "need at least one input");
  SpacePtr space = make_numeric_space(2);
  Rng rng(29);
  double span = 0.9 * std::min(p_bar, 1.0 - p_bar);
  std::vector<Unit> units;
  for (std::size_t i = 0; i + 1 < n_inputs; i += 2) {
    double d = rng.uniform(0.0, span);
    for (double rate : {p_bar + d, p_bar - d}) {
      Unit u;
      u.x_id = unit_id(units.size());
      u.preds.emplace("f", PropertyValue(Pmf(space, {0.5, 0.5})));
      u.preds.emplace("fmean", PropertyValue(0.5));
      u.cond = {1.0 - rate, rate};
      units.push_back(std::move(u));
    }
  }
  if (units.size() < n_inputs) {
    Unit u;
    u.x_id = unit_id(units.size());
    u.preds.emplace("f", PropertyValue(Pmf(space, {0.5, 0.5})));
    u.preds.emplace("fmean", PropertyValue(0.5));
    u.cond = {1.0 - p_bar, p_bar};
    units.push_back(std::move(u));
  }
  Scenario s;
  s.name = "half_predictor";
  s.dataset = units_to_dataset(s.name, space, units);
  LossFn sq = make_squared_loss(space);
  s.losses.emplace("sq", ScenarioLoss{std::move(sq),
                                      real_grid({0.0, 0.25, 0.5, 0.75, 1.0}), std::nullopt});
  s.expected.push_back(ExpectedQuantity{
      "decision_sq", "decision:f:sq", 0.0, 1e-12,
      "squared deviation from 1/2 is 1/4 for both outcomes, matching the forecast"});
  s.expected.push_back(ExpectedQuantity{"vanilla_sup", "agg:sup:vanilla:fmean",
                                        std::abs(p_bar - 0.5), 1e-12,
                                        "single level at 1/2 with base rate p_bar"});
  return s;
}

namespace {

// Least-norm pmf on the embedding with given mean and second moment; active
// set on nonnegativity. Throws Unrealizable when the moments cannot be met.
std::vector<double> moment_matching_pmf(const std::vector<double>& e, double mean,
                                        double second_moment) {
  std::size_t k = e.size();
  std::vector<bool> free(k, true);
  for (std::size_t round = 0; round <= k; ++round) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < k; ++j) {
      if (free[j]) idx.push_back(j);
    }
    if (idx.size() < 3) fail(ErrorCode::kUnrealizable, "moment matching ran out of support");
    // Solve min ||p||^2 s.t. A p = b via A A^T lambda = b, p = A^T lambda.
    double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double b[3] = {1.0, mean, second_moment};
    auto row = [&](std::size_t r, std::size_t j) {
      double x = e[idx[j]];
      return r == 0 ? 1.0 : (r == 1 ? x : x * x);
    };
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < idx.size(); ++j) acc += row(r, j) * row(c, j);
        A[r][c] = acc;
      }
    }
    // Gaussian elimination with partial pivoting on the 3x3 system.
    double lambda[3];
    {
      double M[3][4];
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) M[r][c] = A[r][c];
        M[r][3] = b[r];
      }
      for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
          if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        }
        if (std::abs(M[piv][col]) < 1e-12) {
          fail(ErrorCode::kUnrealizable, "degenerate moment system");
        }
        std::swap(M[col], M[piv]);
        for (int r = 0; r < 3; ++r) {
          if (r == col) continue;
          double fct = M[r][col] / M[col][col];
          for (int c = col; c < 4; ++c) M[r][c] -= fct * M[col][c];
        }
      }
      for (int r = 0; r < 3; ++r) lambda[r] = M[r][3] / M[r][r];
    }
    std::vector<double> p(k, 0.0);
    double most_negative = 0.0;
    std::size_t worst = k;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      double val = lambda[0] * row(0, j) + lambda[1] * row(1, j) + lambda[2] * row(2, j);
      p[idx[j]] = val;
      if (val < most_negative) {
        most_negative = val;
        worst = idx[j];
      }
    }
    if (most_negative >= -1e-12) {
      double m1 = 0.0, m2 = 0.0, m0 = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        p[j] = std::max(p[j], 0.0);
        m0 += p[j];
        m1 += p[j] * e[j];
        m2 += p[j] * e[j] * e[j];
      }
      if (std::abs(m0 - 1.0) > 1e-9 || std::abs(m1 - mean) > 1e-9 ||
          std::abs(m2 - second_moment) > 1e-9) {
        fail(ErrorCode::kUnrealizable, "moments infeasible on this outcome grid");
      }
      return p;
    }
    free[worst] = false;
  }
  fail(ErrorCode::kUnrealizable, "active set failed to converge");
}

}  // namespace

Scenario counterexample_mean_variance(double v, std::size_t grid_size) {
  if (grid_size < 4) fail(ErrorCode::kBadParam, "need at least 4 outcome values");
  if (!(v >= 1.0 && v <= 2.0)) {
    fail(ErrorCode::kUnrealizable, "second moment must lie in [1, 2] for both conditionals");
  }
  std::vector<std::string> labels;
  std::vector<double> e;
  for (std::size_t j = 0; j < grid_size; ++j) {
    e.push_back(-1.0 + 3.0 * static_cast<double>(j) / static_cast<double>(grid_size - 1));
    labels.push_back("y" + std::to_string(j));
  }
  SpacePtr space = make_space(labels, e);
  // True conditionals: mean 1 and mean 0, both with uncentered second moment
  // v; predictions swap the means and report v / v+1 as the squared-loss
  // Bayes risks.
  Unit u1;
  u1.x_id = "x1";
  u1.preds.emplace("g", PropertyValue(0.0));
  u1.preds.emplace("h", PropertyValue(v));
  u1.cond = moment_matching_pmf(e, 1.0, v);
  Unit u2;
  u2.x_id = "x2";
  u2.preds.emplace("g", PropertyValue(1.0));
  u2.preds.emplace("h", PropertyValue(v + 1.0));
  u2.cond = moment_matching_pmf(e, 0.0, v);
  Scenario s;
  s.name = "mean_variance";
  s.dataset = units_to_dataset(s.name, space, {u1, u2});
  LossFn sq = make_squared_loss(space);
  s.losses.emplace("sq",
                   ScenarioLoss{std::move(sq), real_grid(linspace(-1.0, 2.0, 13)),
                                std::nullopt});
  s.properties.emplace("mean", make_mean(space));
  s.properties.emplace("variance", make_variance(space));
  s.expected.push_back(ExpectedQuantity{
      "bayes_risk", "bayes_risk:g:h:sq", 0.0, 1e-9,
      "E[(Y-g)^2 - h] vanishes per input by the moment construction"});
  s.expected.push_back(ExpectedQuantity{"mean_residual", "agg:sup:gamma:g:mean", 1.0, 1e-9,
                                        "means are swapped across the two inputs"});
  s.expected.push_back(ExpectedQuantity{"variance_residual", "agg:sup:gamma:h:variance", 1.0,
                                        1e-9, "risk estimates are off by one at each level"});
  s.expected.push_back(ExpectedQuantity{"mean_residual_expected",
                                        "agg:expected:gamma:g:mean", 1.0, 1e-9,
                                        "both levels have residual one"});
  return s;
}

Scenario cost_parity_construction(double c, double d, double f_mid) {
  if (!(0.0 < d && d < c && c < 1.0)) fail(ErrorCode::kBadParam, "need 0 < d < c < 1");
  double q = 1.0 / ((1.0 - c) / d + 1.0);
  if (!(d < f_mid && f_mid < q)) {
    fail(ErrorCode::kBadParam, "mid-level prediction must lie in (d, q)");
  }
  double x = (1.0 - q) * f_mid / (q * (1.0 - f_mid));
  SpacePtr space = make_numeric_space(2);
  Unit a;  // predicted f_mid, outcome 0
  a.x_id = "x0";
  a.preds.emplace("f", PropertyValue(f_mid));
  a.preds.emplace("p", PropertyValue(Pmf(space, {1.0 - f_mid, f_mid})));
  a.cond = {1.0, 0.0};
  a.weight = 1.0 - q;
  Unit b;  // predicted f_mid, outcome 1
  b.x_id = "x1";
  b.preds = a.preds;
  b.cond = {0.0, 1.0};
  b.weight = q * x;
  Unit e;  // predicted 1, outcome 1
  e.x_id = "x2";
  e.preds.emplace("f", PropertyValue(1.0));
  e.preds.emplace("p", PropertyValue(Pmf(space, {0.0, 1.0})));
  e.cond = {0.0, 1.0};
  e.weight = q * (1.0 - x);
  Scenario s;
  s.name = "cost_parity";
  s.dataset = units_to_dataset(s.name, space, {a, b, e});
  SimpleLossPair lc = make_simple_loss(space, c);
  SimpleLossPair ld = make_simple_loss(space, d);
  s.properties.emplace("phi_c", lc.property);
  s.properties.emplace("phi_d", ld.property);
  s.losses.emplace("lc", ScenarioLoss{std::move(lc.loss), lc.grid, std::nullopt});
  s.losses.emplace("ld", ScenarioLoss{std::move(ld.loss), ld.grid, std::nullopt});
  double bayes = (1.0 - c) * q;
  double gap = (1.0 - q) * std::abs(f_mid * (1.0 - c) / (1.0 - f_mid) - d);
  s.expected.push_back(ExpectedQuantity{"vanilla_sup", "agg:sup:vanilla:f", 0.0, 1e-12,
                                        "stationary-odds weights make both levels exact"});
  s.expected.push_back(ExpectedQuantity{"bayes_c", "marginal_bayes_risk:lc", bayes, 1e-12,
                                        "(1-c) q on the pooled marginal"});
  s.expected.push_back(ExpectedQuantity{"bayes_d", "marginal_bayes_risk:ld",
                                        d * (1.0 - q), 1e-12, "d (1-q), equal by choice of q"});
  s.expected.push_back(ExpectedQuantity{"cost_c", "downstream_cost:p:lc",
                                        q * x * (1.0 - c), 1e-12,
                                        "mid level decides b under cost c"});
  s.expected.push_back(ExpectedQuantity{"cost_d", "downstream_cost:p:ld",
                                        (1.0 - q) * d, 1e-12,
                                        "mid level decides a under cost d"});
  s.expected.push_back(ExpectedQuantity{"cost_gap", "cost_gap:p:lc:ld", gap, 1e-12,
                                        "(1-q) |f (1-c) / (1-f) - d|"});
  return s;
}

Scenario make_recovery_scenario(std::uint64_t seed, std::size_t index,
                                double planted_offset, std::size_t* perturbed_level) {
  Rng rng(Rng::derive_seed(seed, 0xfeedface00000000ull + index));
  SpacePtr space = make_numeric_space(3);
  std::size_t n_levels = 2 + rng.integer(3);
  // Well-separated interior pmfs so the separating hyperplanes exist.
  std::vector<std::vector<double>> pmfs;
  std::size_t budget = 2000;
  while (pmfs.size() < n_levels && budget-- > 0) {
    std::vector<double> w = rng.simplex_weights(3);
    for (double& x : w) x = 0.55 * x + 0.45 / 3.0;
    bool ok = true;
    for (const auto& other : pmfs) {
      double d2 = 0.0;
      for (std::size_t y = 0; y < 3; ++y) d2 += (w[y] - other[y]) * (w[y] - other[y]);
      if (std::sqrt(d2) < 0.15) ok = false;
    }
    if (ok) pmfs.push_back(std::move(w));
  }
  if (pmfs.size() < n_levels) {
    fail(ErrorCode::kRejectionBudgetExceeded, "could not sample separated distributions");
  }
  std::size_t target = rng.integer(n_levels);
  if (perturbed_level) *perturbed_level = target;
  std::vector<Unit> units;
  for (std::size_t j = 0; j < n_levels; ++j) {
    Pmf p(space, pmfs[j]);
    if (planted_offset > 0.0 && j == target) {
      std::size_t a = rng.integer(3);
      std::size_t b = rng.integer(3);
      while (b == a) b = rng.integer(3);
      std::vector<double> cond = pmfs[j];
      cond[a] += planted_offset;
      cond[b] -= planted_offset;
      if (cond[b] < 0.0) fail(ErrorCode::kBadParam, "offset exceeds component headroom");
      Unit u;
      u.x_id = unit_id(units.size());
      u.preds.emplace("f", PropertyValue(p));
      u.cond = std::move(cond);
      units.push_back(std::move(u));
      continue;
    }
    std::size_t m = 1 + rng.integer(2);
    auto noise = zero_sum_noise(rng, 3, m, min_component(pmfs[j]));
    for (std::size_t i = 0; i < m; ++i) {
      Unit u;
      u.x_id = unit_id(units.size());
      u.preds.emplace("f", PropertyValue(p));
      u.cond = add(pmfs[j], noise[i]);
      units.push_back(std::move(u));
    }
  }
  Scenario s;
  s.name = "recovery[" + std::to_string(index) + "]";
  s.dataset = units_to_dataset(s.name, space, units);
  return s;
}

// --- generic scenarios for the oracle cross-check -----------------------------

Scenario make_oracle_scenario(std::uint64_t seed, std::size_t index,
                              std::vector<std::string>* quantities) {
  Rng rng(Rng::derive_seed(seed, 0x9e3779b97f4a7c15ull + index));
  bool binary = index % 2 == 0;
  SpacePtr space = binary ? make_numeric_space(2) : make_numeric_space(3);
  std::size_t k = space->size();
  Scenario s;
  s.name = "oracle[" + std::to_string(index) + "]";
  std::size_t n = 4 + rng.integer(7);
  std::vector<Pmf> pool;
  std::vector<Unit> units;
  for (std::size_t i = 0; i < n; ++i) {
    Unit u;
    u.x_id = unit_id(i);
    Pmf f = (!pool.empty() && rng.coin()) ? pool[rng.integer(pool.size())]
                                          : Pmf(space, interior_weights(rng, k));
    pool.push_back(f);
    u.preds.emplace("f", PropertyValue(f));
    double level = std::floor(rng.uniform(0.05, 0.95) * 20.0) / 20.0;
    u.preds.emplace("fmean", PropertyValue(level));
    u.preds.emplace("tok", PropertyValue(space->labels()[rng.integer(k)]));
    u.preds.emplace("g", PropertyValue(rng.uniform(0.0, static_cast<double>(k - 1))));
    u.preds.emplace("h", PropertyValue(rng.uniform(0.0, 1.0)));
    u.groups.emplace("grp", i == 0 ? true : (i == 1 ? false : rng.coin()));
    u.cond = interior_weights(rng, k);
    u.weight = 0.5 + 1.5 * rng.uniform();
    units.push_back(std::move(u));
  }
  s.dataset = units_to_dataset(s.name, space, units);
  std::vector<double> e = space->embedding();
  LossFn sq = make_squared_loss(space);
  s.losses.emplace("sq", ScenarioLoss{std::move(sq),
                                      real_grid(linspace(e.front(), e.back(), 11)),
                                      std::nullopt});
  LossFn zo = make_zero_one_loss(space);
  s.losses.emplace("zo", ScenarioLoss{std::move(zo), label_grid(space), std::nullopt});
  s.properties.emplace("mean", make_mean(space));
  s.properties.emplace("mode", make_mode(space));
  s.properties.emplace("ranking", make_ranking(space));
  s.properties.emplace("full", make_full_distribution(space));
  IdentificationFn vmean = make_mean_identification(space);
  s.idents.emplace("vmean",
                   ScenarioIdent{std::move(vmean), 0.0, 64,
                                 real_grid(linspace(e.front(), e.back(), 11))});
  std::vector<std::string> qs = {
      "gamma:fmean:mean",
      "dist:f:mode",
      "dist:f:ranking",
      "dist:f:full",
      "dist:f:mean",
      "swap:fmean:sq",
      "swap:tok:zo",
      "decision:f:sq",
      "decision:f:zo",
      "decision_signed:f:sq",
      "bayes_risk:g:h:sq",
      "bayes_risk_signed:g:h:sq",
      "marginal_bayes_risk:sq",
      "marginal_bayes_risk:zo",
      "downstream_cost:f:zo",
      "cost_gap:f:sq:zo",
      "agg:expected:gamma:fmean:mean",
      "agg:expected_square:swap:fmean:sq",
      "agg:sup:dist:f:mode",
      "group:grp:expected:gamma:fmean:mean",
      "group:grp:sup:swap:fmean:sq",
      "robust_swap_raw:fmean:vmean",
      "robust_swap_norm:fmean:vmean",
  };
  if (binary) {
    qs.push_back("vanilla:fmean");
    qs.push_back("agg:expected:vanilla:fmean");
    qs.push_back("group:grp:sup:vanilla:fmean");
    SimpleLossPair lq = make_simple_loss(space, rng.uniform(0.2, 0.8));
    SimpleLossPair lq2 = make_simple_loss(space, rng.uniform(0.2, 0.8));
    s.losses.emplace("lq", ScenarioLoss{std::move(lq.loss), lq.grid, std::nullopt});
    s.losses.emplace("lq2", ScenarioLoss{std::move(lq2.loss), lq2.grid, std::nullopt});
    qs.push_back("downstream_cost:f:lq");
    qs.push_back("cost_gap:f:lq:lq2");
    qs.push_back("decision:f:lq");
  }
  if (quantities) *quantities = std::move(qs);
  return s;
}

}  // namespace calibatlas
