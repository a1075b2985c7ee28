// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_VERIFY_HPP_
#define CALIBATLAS_VERIFY_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calibatlas/dataset.hpp"
#include "calibatlas/losses.hpp"
#include "calibatlas/metrics.hpp"
#include "calibatlas/properties.hpp"

namespace calibatlas {

// A loss bundled with its reassignment grid and, when relevant, the declared
// locally-outcome-Lipschitz constant B used by the refined-swap bound.
struct ScenarioLoss {
  LossFn loss;
  std::vector<PropertyValue> grid;
  std::optional<double> outcome_lipschitz_b;
};

// An identification function bundled with induced-loss parameters.
struct ScenarioIdent {
  IdentificationFn v;
  double gamma0 = 0.0;
  std::size_t n_quad = 256;
  std::vector<PropertyValue> grid;
};

// A refinement phi applied to a base property/prediction, used by the
// inheritance and refined-swap edges.
struct Refinement {
  std::string base_prediction;   // prediction carrying Gamma-values
  std::string base_property;     // key into Scenario::properties
  std::string refined_property;  // key into Scenario::properties
  std::function<PropertyValue(const PropertyValue&)> phi_map;
  std::optional<double> phi_lipschitz;
};

// A named expected quantity with tolerance; `quantity` uses the token grammar
// accepted by eval_quantity (see below).
struct ExpectedQuantity {
  std::string name;
  std::string quantity;
  double value = 0.0;
  double tolerance = 0.0;
  std::string note;  // where the value comes from (closed form, construction)
};

struct Scenario {
  std::string name;
  std::optional<PredictionDataset> dataset;  // engaged on every constructed scenario
  std::map<std::string, Property> properties;
  std::map<std::string, ScenarioLoss> losses;
  std::map<std::string, ScenarioIdent> idents;
  std::vector<Refinement> refinements;
  std::vector<ExpectedQuantity> expected;

  const PredictionDataset& data() const;
};

// --- implication edges -------------------------------------------------------

enum class EdgeKind : int {
  kDistImpliesGamma = 0,
  kDistImpliesGammaApprox,
  kDistImpliesDecision,
  kDistImpliesDecisionApprox,
  kGammaIffSwap,
  kGammaInherited,
  kDistInherited,
  kSwapForRefined,
  kDecisionImpliesBayes,
  kSelfrealImpliesPrecise,
  kDecisionEquivVanillaBinary,
};

struct ImplicationEdge {
  EdgeKind kind;
  std::string name;  // stable token, e.g. "dist_implies_gamma"
};

const std::vector<ImplicationEdge>& all_edges();
const ImplicationEdge& edge_by_name(const std::string& name);

struct EdgeOptions {
  // Fault-injection hook for tests: scales every conclusion bound.
  double bound_scale = 1.0;
};

struct EdgeResult {
  bool hypothesis_met = false;
  bool conclusion_holds = false;
  // Minimum over checked levels of (bound - residual); negative when the
  // conclusion is violated.
  double slack = 0.0;
  std::string detail;
};

EdgeResult check_edge(const ImplicationEdge& edge, const Scenario& scenario,
                      const EdgeOptions& options = {});

// Seeded generator of hypothesis-satisfying scenarios for an edge.
Scenario make_edge_scenario(EdgeKind kind, std::uint64_t seed, std::size_t index);

// --- counterexample constructions --------------------------------------------

// Constant predictor 1/2 on a binary outcome set whose conditional rates
// average to p_bar: decision-calibrated for the squared loss at any base
// rate, vanilla residual |p_bar - 1/2|.
Scenario counterexample_half_predictor(double p_bar, std::size_t n_inputs);

// Two-point construction where mean and Bayes-risk predictions are swapped
// relative to the truth: the Bayes-risk estimation residual vanishes while
// mean- and variance-calibration residuals equal 1. Outcomes are grid_size
// evenly spaced values spanning [-1, 2]; moments are matched by
// equality-constrained least squares (throws Unrealizable when infeasible).
Scenario counterexample_mean_variance(double v, std::size_t grid_size);

// Stationary-odds construction with two vanilla-calibrated prediction levels
// whose downstream simple-loss costs differ: q = 1/((1-c)/d + 1), Bayes
// risks under cost c and d coincide at (1-c)q, and the realized cost gap is
// (1-q) |f_mid (1-c)/(1-f_mid) - d|. Requires 0 < d < c < 1, d < f_mid < q.
Scenario cost_parity_construction(double c, double d, double f_mid);

// --- full-distribution recovery via separating hyperplanes -------------------

struct HyperplaneCheck {
  std::size_t point_index = 0;    // index into the predicted-distribution levels
  double below_sup = 0.0;         // sup residual of the below-shifted binary check
  double above_sup = 0.0;         // sup residual of the above-shifted binary check
  double recovered_residual = 0.0;  // per-point residual extracted from the pair
  bool flagged = false;
};

struct RecoveryReport {
  bool recovered = false;  // (full calibration holds) == (no pair flags a point)
  double full_dist_sup = 0.0;
  std::vector<HyperplaneCheck> per_hyperplane;
  std::vector<std::size_t> flagged_levels;
};

// For each distinct predicted distribution, finds a hyperplane through it
// separating every other predicted point by at least epsilon (throws
// SeparationFailure naming the closest pair when impossible), builds the two
// epsilon/2-shifted binary properties, and checks distribution calibration
// with respect to each. A point is flagged when the two checks' unnormalized
// mismatch vectors differ, which isolates exactly that point's level.
RecoveryReport recover_distribution_calibration(const PredictionDataset& data,
                                                const std::string& dist_prediction,
                                                double epsilon, std::uint64_t seed = 17);

// --- quantities and the brute-force oracle ------------------------------------

// Token grammar (colon-separated):
//   vanilla:<pred>                         per-level
//   gamma:<pred>:<prop>                    per-level
//   dist:<pred>:<prop>                     per-level (max over components)
//   swap:<pred>:<loss>                     per-level
//   decision:<pred>:<loss>                 scalar |beta|
//   decision_signed:<pred>:<loss>          scalar
//   bayes_risk:<g>:<h>:<loss>              scalar |beta|
//   bayes_risk_signed:<g>:<h>:<loss>       scalar
//   marginal_bayes_risk:<loss>             scalar Bayes risk of the pooled pmf
//   downstream_cost:<pred>:<loss>          scalar realized loss, thresholded decisions
//   cost_gap:<pred>:<loss1>:<loss2>        scalar |cost1 - cost2|
//   agg:<expected|expected_square|sup>:<per-level quantity...>   scalar
//   group:<group>:<agg>:<per-level quantity...>   scalar sup across group sides
//   robust_swap_raw:<pred>:<ident>         scalar (all dataset groups)
//   robust_swap_norm:<pred>:<ident>        scalar
struct QuantityEntry {
  PropertyValue level;  // token "(scalar)" for scalar quantities
  double weight = 1.0;  // share of dataset weight (1 for scalar quantities)
  double value = 0.0;
};
using QuantityResult = std::vector<QuantityEntry>;

// Evaluation through the calibration-metrics operations.
QuantityResult eval_quantity(const Scenario& scenario, const std::string& quantity);
// Independent recomputation by direct summation over records, levels, and
// grid points. Throws TooLarge beyond 10^4 records or 10^3 grid points.
QuantityResult eval_quantity_oracle(const Scenario& scenario, const std::string& quantity);

// Largest |metrics - oracle| discrepancy across matching levels; throws
// Internal when the level sets disagree.
double max_quantity_discrepancy(const QuantityResult& a, const QuantityResult& b);

// Seeded generic scenario for the oracle cross-check suite; `metric_kind`
// picks which quantity tokens the scenario exercises (returned in
// quantities).
Scenario make_oracle_scenario(std::uint64_t seed, std::size_t index,
                              std::vector<std::string>* quantities);

// Seeded recovery scenario: well-separated predicted distributions on a
// three-outcome space, exactly distribution calibrated except that, when
// planted_offset > 0, one level's conditional is shifted by that amount
// between two components; the level's index is written to perturbed_level.
Scenario make_recovery_scenario(std::uint64_t seed, std::size_t index,
                                double planted_offset, std::size_t* perturbed_level);

}  // namespace calibatlas

#endif  // CALIBATLAS_VERIFY_HPP_
