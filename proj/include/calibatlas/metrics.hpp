// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_METRICS_HPP_
#define CALIBATLAS_METRICS_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calibatlas/dataset.hpp"
#include "calibatlas/losses.hpp"
#include "calibatlas/properties.hpp"

namespace calibatlas {

// One conditioning event: the predicted value, its share of dataset weight,
// and a nonnegative residual.
struct LevelResidual {
  PropertyValue level;
  double weight = 0.0;  // share of total dataset weight, in (0, 1]
  double residual = 0.0;
};

struct LevelResidualMap {
  std::string metric_name;
  std::vector<LevelResidual> entries;  // in first-appearance order
};

enum class Aggregation : int { kExpected = 0, kExpectedSquare = 1, kSup = 2 };

const char* aggregation_name(Aggregation mode);

// Weighted aggregate over entries (weights renormalized over the included
// levels). Throws EmptyMap for an empty map.
double aggregate(const LevelResidualMap& map, Aggregation mode);

// |E[Y | f = gamma] - gamma| per level of a real-valued prediction on a
// binary space with embedding {0, 1}. Throws NotBinary otherwise.
LevelResidualMap vanilla_calibration(const PredictionDataset& data,
                                     const std::string& prediction);

// Distribution calibration with respect to a property: conditions on the
// property value of the predicted distribution and compares, per outcome
// component, the empirical conditional against the average prediction.
struct DistCalibrationResult {
  LevelResidualMap max_map;                      // residual = max over components
  std::vector<LevelResidualMap> per_component;   // one map per outcome label
};
DistCalibrationResult distribution_calibration(const PredictionDataset& data,
                                               const std::string& dist_prediction,
                                               const Property& prop);

// Property-calibration residual: distance between the property of the
// conditional distribution and the predicted value, per level.
LevelResidualMap gamma_calibration(const PredictionDataset& data,
                                   const std::string& prediction, const Property& prop);

// Per-level swap regret of a prediction under a loss with reassignment over a
// finite grid; negative regret (possible only through the grid missing the
// incurred decision) is clipped to zero and flagged via *clipped.
LevelResidualMap swap_regret(const PredictionDataset& data, const std::string& prediction,
                             const LossFn& loss, const std::vector<PropertyValue>& grid,
                             bool* clipped = nullptr);

struct DecisionResidual {
  double beta = 0.0;          // |signed_value|
  double signed_value = 0.0;  // E[l(Y, dec) - E_{Yhat~f}[l(Yhat, dec)]]
};

struct LossWithGrid {
  std::string name;
  LossFn loss;
  std::vector<PropertyValue> grid;
};

// Decision-calibration residual per loss: decisions are per-record best
// responses to the predicted distribution over the loss's grid.
std::map<std::string, DecisionResidual> decision_calibration(
    const PredictionDataset& data, const std::string& dist_prediction,
    const std::vector<LossWithGrid>& losses);

// |E[l(Y, g(X)) - h(X)]| for a decision prediction g and a real-valued risk
// prediction h.
DecisionResidual bayes_risk_estimation_residual(const PredictionDataset& data,
                                                const std::string& decision_prediction,
                                                const std::string& risk_prediction,
                                                const LossFn& loss);

// Applies a metric closure to the group's records and to its complement;
// reports per-group maps plus the sup across groups of the per-group
// aggregate. An empty complement is skipped.
struct GroupMetricResult {
  std::map<std::string, LevelResidualMap> per_group;
  double sup_aggregate = 0.0;
};
GroupMetricResult group_metric(const PredictionDataset& data, const std::string& group,
                               const std::function<LevelResidualMap(const PredictionDataset&)>& metric,
                               Aggregation mode);

// Swap regret per group (flag = 1) for the loss induced by an identification
// function: raw regret E[l | c] - best sigma(f)-measurable reassignment, and
// the group-share–normalized value regret * E[c(X)].
struct RobustSwapResult {
  struct PerGroup {
    double raw = 0.0;
    double normalized = 0.0;
    double group_share = 0.0;
  };
  std::map<std::string, PerGroup> per_group;
  double raw_sup = 0.0;
  double normalized_sup = 0.0;
};
RobustSwapResult robust_swap_regret(const PredictionDataset& data,
                                    const std::string& prediction,
                                    const IdentificationFn& v,
                                    const std::vector<std::string>& groups,
                                    const std::vector<PropertyValue>& grid, double gamma0,
                                    std::size_t n_quad);

// Average realized loss when every record acts on its predicted distribution
// with the grid-best response: E[l(Y, argmin_g E_{Yhat~f(X)}[l(Yhat, g)])].
double downstream_cost(const PredictionDataset& data, const std::string& dist_prediction,
                       const LossFn& loss, const std::vector<PropertyValue>& grid);

// Bayes risk of the pooled outcome marginal over the grid.
double marginal_bayes_risk(const PredictionDataset& data, const LossFn& loss,
                           const std::vector<PropertyValue>& grid);

}  // namespace calibatlas

#endif  // CALIBATLAS_METRICS_HPP_
