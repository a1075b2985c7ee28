// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_LOSSES_HPP_
#define CALIBATLAS_LOSSES_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calibatlas/outcomes.hpp"
#include "calibatlas/properties.hpp"
#include "calibatlas/value.hpp"

namespace calibatlas {

// A loss: maps (outcome, decision value) to a real penalty. The decision's
// value kind is fixed per loss (real for scalar decisions, token for discrete
// actions, ...).
struct LossFn {
  std::string name;
  SpacePtr space;
  PropertyValue::Kind value_kind = PropertyValue::Kind::kReal;
  std::function<double(std::size_t y, const PropertyValue&)> eval;
  // sup over decisions of sum_y |l(y, v)|, when declared; used by the
  // approximate decision-calibration bound.
  std::optional<double> bound_c;
  // Quadrature metadata when built from an identification function without a
  // closed-form integral: error bound is coeff * |gamma - gamma0|^3.
  std::optional<double> quad_error_coeff;
  std::optional<double> gamma0;
};

// An identification function V(y, gamma) for a real-valued property, oriented
// so that sum_y P(y) V(y, gamma) is positive exactly when gamma overshoots
// the property value. Optional declared regularity constants:
//   nonconstant_n: N |gamma - Gamma(P)| <= |V(P, gamma)|
//   lipschitz_m:   |V(P, gamma)| <= M |gamma - Gamma(P)|
struct IdentificationFn {
  std::string name;
  SpacePtr space;
  std::function<double(std::size_t y, double gamma)> eval;
  bool oriented = true;
  std::optional<double> lipschitz_m;
  std::optional<double> nonconstant_n;
  // Exact integral over r in [a, b] of V(y, r), when known in closed form.
  std::optional<std::function<double(std::size_t y, double a, double b)>> integral;
};

// sum_y p_y * l(y, v). Throws KindMismatch when v's kind differs from the
// loss's value kind, SpaceMismatch for foreign pmfs.
double expected_loss(const LossFn& loss, const Pmf& p, const PropertyValue& v);

// sum_y p_y * V(y, gamma).
double expected_identification(const IdentificationFn& v, const Pmf& p, double gamma);

struct BestResponse {
  std::size_t index = 0;        // position in the grid
  PropertyValue value;          // grid[index]
  double expected = 0.0;        // minimal expected loss
};

// Argmin of expected loss over a finite grid; ties keep the earliest grid
// entry. Throws EmptyGrid.
BestResponse best_response(const LossFn& loss, const Pmf& p,
                           const std::vector<PropertyValue>& grid);

// sup over the grid of sum_y |l(y, v)| — the decision-bound constant C.
double loss_bound_over_grid(const LossFn& loss, const std::vector<PropertyValue>& grid);

// l(y, gamma) = integral_{gamma0}^{gamma} V(y, r) dr + kappa(y).
// Uses the identification's closed-form integral when available, otherwise a
// composite trapezoid rule with n_quad panels (exact for V affine in r).
// kappa may be empty (all zeros) or one value per outcome.
// Throws NotOriented for anti-oriented V, BadParam / LengthMismatch.
LossFn loss_from_identification(const IdentificationFn& v, double gamma0,
                                const std::vector<double>& kappa, std::size_t n_quad);

struct ConsistencyWitness {
  Pmf p;
  PropertyValue best_response_value;
  PropertyValue property_value;
  double gap = 0.0;
};

struct ConsistencyReport {
  bool consistent = true;
  double worst_gap = 0.0;
  std::size_t trials = 0;
  std::optional<ConsistencyWitness> witness;  // populated when inconsistent
};

// Samples seeded pmfs and compares best_response over the grid (augmented
// with the property's value at each sample so the true value is always a
// candidate) against the property value; consistent when the worst metric
// gap stays below 1e-6.
ConsistencyReport check_consistency(const LossFn& loss, const Property& prop,
                                    std::size_t n_trials, std::uint64_t seed,
                                    const std::vector<PropertyValue>& grid);

// --- loss catalog -----------------------------------------------------------

// (y - gamma)^2 on the embedding; real decisions.
LossFn make_squared_loss(const SpacePtr& space);
// (1 - tau) max(gamma - y, 0) + tau max(y - gamma, 0); elicits the
// tau-quantile; real decisions.
LossFn make_pinball_loss(const SpacePtr& space, double tau);
// 1 when the decided label differs from the outcome; token decisions over the
// labels; elicits the mode.
LossFn make_zero_one_loss(const SpacePtr& space);

// The simple binary decision loss with parameter q in (0, 1):
//   l_q(y, "a") = q  when y = 0,   l_q(y, "b") = 1 - q when y = 1,  else 0.
// Eliciting property: "a" when P(Y = 1) > q else "b".
struct SimpleLossPair {
  LossFn loss;
  Property property;
  std::vector<PropertyValue> grid;  // {"a", "b"}
};
SimpleLossPair make_simple_loss(const SpacePtr& space, double q);

// Bayes pair of a loss over a finite decision grid: the argmin property and
// the minimal-expected-loss (Bayes risk) property.
struct BayesPair {
  Property phi;    // argmin; metric follows the loss's value kind
  Property theta;  // Bayes risk; real-valued
  LossFn loss;
  std::vector<PropertyValue> grid;
};
BayesPair make_bayes_pair(const LossFn& loss, const std::vector<PropertyValue>& grid,
                          const std::string& name);

// --- identification catalog (all oriented) ----------------------------------

// Mean: V(y, gamma) = gamma - y; N = M = 1.
IdentificationFn make_mean_identification(const SpacePtr& space);
// tau-quantile: V(y, gamma) = (1 - tau)[[y < gamma]] - tau[[y > gamma]].
IdentificationFn make_quantile_identification(const SpacePtr& space, double tau);
// Ratio of expectations E[g]/E[h], h > 0: V(y, gamma) = h(y) gamma - g(y);
// N = min h, M = max h.
IdentificationFn make_ratio_identification(const SpacePtr& space, std::vector<double> g,
                                           std::vector<double> h);
// Second central moment reported on the mean level v:
// V(y, gamma) = gamma - (y^2 - v^2); N = M = 1.
IdentificationFn make_variance_on_mean_level(const SpacePtr& space, double v);
// Conditional value at risk on the tau-quantile level v:
// V(y, gamma) = gamma - v - max(0, y - v) / (1 - tau); N = M = 1.
IdentificationFn make_cvar_on_quantile_level(const SpacePtr& space, double v, double tau);

struct RegularityEstimate {
  double n_hat = 0.0;       // min |V(P, gamma)| / |gamma - Gamma(P)|
  double m_hat = 0.0;       // max of the same ratio
  bool oriented_ok = true;  // no sign conflicts observed
  std::size_t samples = 0;
};

// Seeded estimate of the identification regularity constants over random
// pmfs and the provided gamma grid; pairs with |gamma - Gamma(P)| <= 1e-6
// are skipped. A zero V at distance > 1e-6 counts as an orientation
// violation (it also breaks local non-constancy).
RegularityEstimate estimate_identification_regularity(const IdentificationFn& v,
                                                      const Property& prop,
                                                      std::size_t n_trials,
                                                      std::uint64_t seed,
                                                      const std::vector<double>& gamma_grid);

}  // namespace calibatlas

#endif  // CALIBATLAS_LOSSES_HPP_
