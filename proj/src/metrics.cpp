// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "calibatlas/error.hpp"
#include "calibatlas/log.hpp"

namespace calibatlas {

const char* aggregation_name(Aggregation mode) {
  switch (mode) {
    case Aggregation::kExpected: return "expected";
    case Aggregation::kExpectedSquare: return "expected_square";
    case Aggregation::kSup: return "sup";
  }
  return "unknown";
}

double aggregate(const LevelResidualMap& map, Aggregation mode) {
  if (map.entries.empty()) {
    fail(ErrorCode::kEmptyMap, "aggregate of empty residual map '" + map.metric_name + "'");
  }
  if (mode == Aggregation::kSup) {
    double best = 0.0;
    for (const auto& e : map.entries) best = std::max(best, e.residual);
    return best;
  }
  double total = 0.0, acc = 0.0;
  for (const auto& e : map.entries) {
    total += e.weight;
    acc += e.weight * (mode == Aggregation::kExpectedSquare ? e.residual * e.residual
                                                            : e.residual);
  }
  if (total <= 0.0) fail(ErrorCode::kEmptyMap, "residual map has zero total weight");
  return acc / total;
}

LevelResidualMap vanilla_calibration(const PredictionDataset& data,
                                     const std::string& prediction) {
  const SpacePtr& space = data.space();
  bool binary01 = space->size() == 2 && space->has_embedding() &&
                  space->embedding()[0] == 0.0 && space->embedding()[1] == 1.0;
  if (!binary01) {
    fail(ErrorCode::kNotBinary,
         "vanilla calibration requires a binary outcome space embedded as {0, 1}");
  }
  if (data.prediction_kind(prediction) != PropertyValue::Kind::kReal) {
    fail(ErrorCode::kKindMismatch, "vanilla calibration requires a real-valued prediction");
  }
  LevelResidualMap map;
  map.metric_name = "vanilla[" + prediction + "]";
  for (const Level& level : data.levels(prediction)) {
    ConditionedPmf cond = data.condition_on_level(level);
    double rate = cond.pmf[1];  // conditional mean on the {0, 1} embedding
    map.entries.push_back(
        LevelResidual{level.value, level.weight_share, std::abs(rate - level.value.real())});
  }
  return map;
}

DistCalibrationResult distribution_calibration(const PredictionDataset& data,
                                               const std::string& dist_prediction,
                                               const Property& prop) {
  if (data.prediction_kind(dist_prediction) != PropertyValue::Kind::kDistribution) {
    fail(ErrorCode::kKindMismatch,
         "distribution calibration requires a distribution-valued prediction");
  }
  // Condition on the property value of the prediction.
  PredictionDataset derived = data.with_derived_prediction(
      "__gamma", [&](const Record& rec) {
        return evaluate(prop, rec.predictions.at(dist_prediction).distribution());
      });

  DistCalibrationResult result;
  result.max_map.metric_name = "dist[" + dist_prediction + ", " + prop.name + "]";
  const SpacePtr& space = data.space();
  result.per_component.resize(space->size());
  for (std::size_t y = 0; y < space->size(); ++y) {
    result.per_component[y].metric_name =
        result.max_map.metric_name + "[y=" + space->labels()[y] + "]";
  }

  for (const Level& level : derived.levels("__gamma")) {
    ConditionedPmf cond = derived.condition_on_level(level);
    // Average prediction over the level's records.
    std::vector<double> avg(space->size(), 0.0);
    double w_level = 0.0;
    for (std::size_t r : level.members) {
      const Record& rec = derived.records()[r];
      const Pmf& f = rec.predictions.at(dist_prediction).distribution();
      for (std::size_t y = 0; y < space->size(); ++y) avg[y] += rec.weight * f[y];
      w_level += rec.weight;
    }
    double worst = 0.0;
    for (std::size_t y = 0; y < space->size(); ++y) {
      double residual = std::abs(cond.pmf[y] - avg[y] / w_level);
      result.per_component[y].entries.push_back(
          LevelResidual{level.value, level.weight_share, residual});
      worst = std::max(worst, residual);
    }
    result.max_map.entries.push_back(LevelResidual{level.value, level.weight_share, worst});
  }
  return result;
}

LevelResidualMap gamma_calibration(const PredictionDataset& data,
                                   const std::string& prediction, const Property& prop) {
  LevelResidualMap map;
  map.metric_name = "gamma[" + prediction + ", " + prop.name + "]";
  for (const Level& level : data.levels(prediction)) {
    ConditionedPmf cond = data.condition_on_level(level);
    PropertyValue truth = evaluate(prop, cond.pmf);
    map.entries.push_back(LevelResidual{
        level.value, level.weight_share,
        value_distance(prop.value_metric, truth, level.value)});
  }
  return map;
}

LevelResidualMap swap_regret(const PredictionDataset& data, const std::string& prediction,
                             const LossFn& loss, const std::vector<PropertyValue>& grid,
                             bool* clipped) {
  if (grid.empty()) fail(ErrorCode::kEmptyGrid, "swap regret needs a reassignment grid");
  if (clipped != nullptr) *clipped = false;
  LevelResidualMap map;
  map.metric_name = "swap[" + prediction + ", " + loss.name + "]";
  for (const Level& level : data.levels(prediction)) {
    ConditionedPmf cond = data.condition_on_level(level);
    double incurred = expected_loss(loss, cond.pmf, level.value);
    double best = best_response(loss, cond.pmf, grid).expected;
    double regret = incurred - best;
    if (regret < 0.0) {
      if (clipped != nullptr) *clipped = true;
      log_warn("swap regret clipped to 0 at level " + level.value.to_string() +
               " (grid does not dominate the incurred decision)");
      regret = 0.0;
    }
    map.entries.push_back(LevelResidual{level.value, level.weight_share, regret});
  }
  return map;
}

std::map<std::string, DecisionResidual> decision_calibration(
    const PredictionDataset& data, const std::string& dist_prediction,
    const std::vector<LossWithGrid>& losses) {
  if (data.prediction_kind(dist_prediction) != PropertyValue::Kind::kDistribution) {
    fail(ErrorCode::kKindMismatch,
         "decision calibration requires a distribution-valued prediction");
  }
  if (losses.empty()) fail(ErrorCode::kEmptyMap, "decision calibration needs at least one loss");
  std::map<std::string, DecisionResidual> out;
  std::vector<Level> levels = data.levels(dist_prediction);
  for (const LossWithGrid& lg : losses) {
    double acc = 0.0;
    for (const Level& level : levels) {
      // The decision depends only on the predicted distribution, so compute
      // it once per distinct prediction.
      const Pmf& f = level.value.distribution();
      BestResponse dec = best_response(lg.loss, f, lg.grid);
      double hypothetical = dec.expected;  // E_{Yhat ~ f}[l(Yhat, dec)]
      for (std::size_t r : level.members) {
        const Record& rec = data.records()[r];
        acc += rec.weight * (lg.loss.eval(rec.y, dec.value) - hypothetical);
      }
    }
    DecisionResidual res;
    res.signed_value = acc / data.total_weight();
    res.beta = std::abs(res.signed_value);
    out.emplace(lg.name, res);
  }
  return out;
}

DecisionResidual bayes_risk_estimation_residual(const PredictionDataset& data,
                                                const std::string& decision_prediction,
                                                const std::string& risk_prediction,
                                                const LossFn& loss) {
  if (data.prediction_kind(decision_prediction) != loss.value_kind) {
    fail(ErrorCode::kKindMismatch, "decision prediction '" + decision_prediction +
                                       "' kind does not match the loss's decision kind");
  }
  if (data.prediction_kind(risk_prediction) != PropertyValue::Kind::kReal) {
    fail(ErrorCode::kKindMismatch, "risk prediction '" + risk_prediction +
                                       "' must be real-valued");
  }
  double acc = 0.0;
  for (const Record& rec : data.records()) {
    acc += rec.weight * (loss.eval(rec.y, rec.predictions.at(decision_prediction)) -
                         rec.predictions.at(risk_prediction).real());
  }
  DecisionResidual res;
  res.signed_value = acc / data.total_weight();
  res.beta = std::abs(res.signed_value);
  return res;
}

GroupMetricResult group_metric(
    const PredictionDataset& data, const std::string& group,
    const std::function<LevelResidualMap(const PredictionDataset&)>& metric,
    Aggregation mode) {
  GroupMetricResult result;
  bool any = false;
  for (bool flag : {true, false}) {
    std::string key = group + "=" + (flag ? "1" : "0");
    try {
      PredictionDataset part = data.restrict_to_group(group, flag);
      LevelResidualMap map = metric(part);
      double agg = aggregate(map, mode);
      result.sup_aggregate = any ? std::max(result.sup_aggregate, agg) : agg;
      any = true;
      result.per_group.emplace(key, std::move(map));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kEmptyGroup) throw;
      log_info("group metric: side " + key + " is empty, skipping");
    }
  }
  if (!any) fail(ErrorCode::kEmptyGroup, "group '" + group + "' has no populated side");
  return result;
}

RobustSwapResult robust_swap_regret(const PredictionDataset& data,
                                    const std::string& prediction,
                                    const IdentificationFn& v,
                                    const std::vector<std::string>& groups,
                                    const std::vector<PropertyValue>& grid, double gamma0,
                                    std::size_t n_quad) {
  if (groups.empty()) fail(ErrorCode::kEmptyMap, "robust swap regret needs at least one group");
  LossFn loss = loss_from_identification(v, gamma0, {}, n_quad);
  RobustSwapResult result;
  bool first = true;
  for (const std::string& group : groups) {
    PredictionDataset part = data.restrict_to_group(group, true);
    double incurred = 0.0;
    for (const Record& rec : part.records()) {
      incurred += rec.weight * loss.eval(rec.y, rec.predictions.at(prediction));
    }
    incurred /= part.total_weight();
    double best = 0.0;
    for (const Level& level : part.levels(prediction)) {
      ConditionedPmf cond = part.condition_on_level(level);
      best += level.weight_share * best_response(loss, cond.pmf, grid).expected;
    }
    RobustSwapResult::PerGroup pg;
    pg.raw = std::max(0.0, incurred - best);
    pg.group_share = part.total_weight() / data.total_weight();
    pg.normalized = pg.raw * pg.group_share;
    if (first) {
      result.raw_sup = pg.raw;
      result.normalized_sup = pg.normalized;
      first = false;
    } else {
      result.raw_sup = std::max(result.raw_sup, pg.raw);
      result.normalized_sup = std::max(result.normalized_sup, pg.normalized);
    }
    result.per_group.emplace(group, pg);
  }
  return result;
}

double downstream_cost(const PredictionDataset& data, const std::string& dist_prediction,
                       const LossFn& loss, const std::vector<PropertyValue>& grid) {
  if (data.prediction_kind(dist_prediction) != PropertyValue::Kind::kDistribution) {
    fail(ErrorCode::kKindMismatch, "downstream cost requires a distribution-valued prediction");
  }
  double acc = 0.0;
  for (const Level& level : data.levels(dist_prediction)) {
    BestResponse dec = best_response(loss, level.value.distribution(), grid);
    for (std::size_t r : level.members) {
      const Record& rec = data.records()[r];
      acc += rec.weight * loss.eval(rec.y, dec.value);
    }
  }
  return acc / data.total_weight();
}

double marginal_bayes_risk(const PredictionDataset& data, const LossFn& loss,
                           const std::vector<PropertyValue>& grid) {
  return best_response(loss, data.marginal(), grid).expected;
}

}  // namespace calibatlas
