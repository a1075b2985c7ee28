// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "calibatlas/error.hpp"
#include "calibatlas/verify.hpp"

namespace calibatlas {
namespace {

constexpr double kExactTol = 1e-9;  // conclusions of exact implications
constexpr double kBoundTol = 1e-9;  // additive slop on approximate bounds
constexpr double kGateTol = 1e-12;  // exactness gates of the equivalence edge

const Property& need_property(const Scenario& s, const std::string& key) {
  auto it = s.properties.find(key);
  if (it == s.properties.end()) {
    fail(ErrorCode::kMissingIngredient, "scenario lacks property '" + key + "'");
  }
  return it->second;
}

const ScenarioLoss& need_loss(const Scenario& s, const std::string& key) {
  auto it = s.losses.find(key);
  if (it == s.losses.end()) {
    fail(ErrorCode::kMissingIngredient, "scenario lacks loss '" + key + "'");
  }
  return it->second;
}

const ScenarioIdent& need_ident(const Scenario& s, const std::string& key) {
  auto it = s.idents.find(key);
  if (it == s.idents.end()) {
    fail(ErrorCode::kMissingIngredient, "scenario lacks identification '" + key + "'");
  }
  return it->second;
}

const Refinement& need_refinement(const Scenario& s) {
  if (s.refinements.empty()) {
    fail(ErrorCode::kMissingIngredient, "scenario lacks a refinement");
  }
  return s.refinements.front();
}

double sup_residual(const LevelResidualMap& map) {
  double sup = 0.0;
  for (const auto& e : map.entries) sup = std::max(sup, e.residual);
  return sup;
}

const LevelResidual* find_level(const LevelResidualMap& map, const PropertyValue& v) {
  for (const auto& e : map.entries) {
    if (e.level == v) return &e;
  }
  return nullptr;
}

// Dataset with the property of a distribution prediction as an extra column.
PredictionDataset with_property_column(const PredictionDataset& data,
                                       const std::string& dist_prediction,
                                       const Property& prop, const std::string& name) {
  return data.with_derived_prediction(name, [&](const Record& r) {
    return evaluate(prop, r.predictions.at(dist_prediction).distribution());
  });
}

struct SlackTracker {
  double slack = std::numeric_limits<double>::infinity();
  bool ok = true;

  void bound(double residual, double limit) {
    slack = std::min(slack, limit - residual);
    if (residual > limit) ok = false;
  }
  double value() const { return std::isfinite(slack) ? slack : 0.0; }
};

EdgeResult check_dist_implies_gamma(const Scenario& s, const EdgeOptions& opt, bool approx) {
  const PredictionDataset& data = s.data();
  const Property& prop = need_property(s, "gamma");
  DistCalibrationResult dist = distribution_calibration(data, "f", prop);
  PredictionDataset data2 = with_property_column(data, "f", prop, "__g");
  LevelResidualMap gmap = gamma_calibration(data2, "__g", prop);

  EdgeResult out;
  SlackTracker tracker;
  std::ostringstream detail;
  if (!approx) {
    out.hypothesis_met = sup_residual(dist.max_map) <= kExactTol;
    for (const auto& e : gmap.entries) tracker.bound(e.residual, kExactTol);
    detail << "exact: dist sup " << sup_residual(dist.max_map) << ", property sup "
           << sup_residual(gmap);
  } else {
    out.hypothesis_met = prop.lipschitz_k.has_value() &&
                         prop.convex_level_sets.value_or(false) &&
                         prop.value_metric == ValueMetric::kAbsDiff;
    double k_tv = prop.lipschitz_k.value_or(0.0);
    double n_y = static_cast<double>(data.space()->size());
    for (const auto& e : gmap.entries) {
      const LevelResidual* a = find_level(dist.max_map, e.level);
      if (a == nullptr) {
        fail(ErrorCode::kInternal, "level sets of the two conditionings disagree");
      }
      tracker.bound(e.residual, opt.bound_scale * n_y * k_tv * a->residual + kBoundTol);
    }
    detail << "approx: |Y| K = " << n_y * k_tv << ", worst slack " << tracker.value();
  }
  out.conclusion_holds = tracker.ok;
  out.slack = tracker.value();
  out.detail = detail.str();
  return out;
}

EdgeResult check_dist_implies_decision(const Scenario& s, const EdgeOptions& opt,
                                       bool approx) {
  const PredictionDataset& data = s.data();
  const Property& prop = need_property(s, "gamma");
  DistCalibrationResult dist = distribution_calibration(data, "f", prop);
  double alpha_sup = sup_residual(dist.max_map);
  double alpha_mean = aggregate(dist.max_map, Aggregation::kExpected);

  EdgeResult out;
  out.hypothesis_met = approx ? true : alpha_sup <= kExactTol;
  SlackTracker tracker;
  std::ostringstream detail;
  for (const auto& [name, sl] : s.losses) {
    double c = loss_bound_over_grid(sl.loss, sl.grid);
    auto res = decision_calibration(data, "f", {LossWithGrid{name, sl.loss, sl.grid}});
    double beta = res.at(name).beta;
    tracker.bound(beta, opt.bound_scale * c * alpha_mean + kBoundTol);
    detail << name << ": beta " << beta << " vs C E[alpha] " << c * alpha_mean << "; ";
  }
  out.conclusion_holds = tracker.ok;
  out.slack = tracker.value();
  out.detail = detail.str();
  return out;
}

EdgeResult check_gamma_iff_swap(const Scenario& s, const EdgeOptions& opt) {
  const PredictionDataset& data = s.data();
  const Property& prop = need_property(s, "gamma");
  const ScenarioIdent& si = need_ident(s, "V");
  const ScenarioLoss& sl = need_loss(s, "loss");

  EdgeResult out;
  out.hypothesis_met =
      si.v.oriented && si.v.lipschitz_m.has_value() && si.v.nonconstant_n.has_value();
  if (!out.hypothesis_met) return out;
  double m = *si.v.lipschitz_m;
  double n = *si.v.nonconstant_n;

  LevelResidualMap amap = gamma_calibration(data, "f", prop);
  LevelResidualMap smap = swap_regret(data, "f", sl.loss, sl.grid);
  SlackTracker tracker;
  for (const auto& e : smap.entries) {
    const LevelResidual* a = find_level(amap, e.level);
    if (a == nullptr) fail(ErrorCode::kInternal, "swap and property level sets disagree");
    // regret <= (M/2) alpha^2, and conversely alpha^2 <= 2 regret / N.
    tracker.bound(e.residual, opt.bound_scale * 0.5 * m * a->residual * a->residual +
                                  kBoundTol);
    tracker.bound(a->residual * a->residual,
                  opt.bound_scale * 2.0 * e.residual / n + kBoundTol);
  }
  out.conclusion_holds = tracker.ok;
  out.slack = tracker.value();
  std::ostringstream detail;
  detail << "M " << m << ", N " << n << ", levels " << smap.entries.size()
         << ", worst slack " << tracker.value();
  out.detail = detail.str();
  return out;
}

EdgeResult check_gamma_inherited(const Scenario& s, const EdgeOptions& opt) {
  const PredictionDataset& data = s.data();
  const Refinement& ref = need_refinement(s);
  const Property& base = need_property(s, ref.base_property);
  const Property& refined = need_property(s, ref.refined_property);

  EdgeResult out;
  out.hypothesis_met =
      ref.phi_lipschitz.has_value() && refined.convex_level_sets.value_or(false);
  double k = ref.phi_lipschitz.value_or(1.0);

  LevelResidualMap amap = gamma_calibration(data, ref.base_prediction, base);
  PredictionDataset data2 =
      data.with_derived_prediction("__phi", [&](const Record& r) {
        return ref.phi_map(r.predictions.at(ref.base_prediction));
      });
  LevelResidualMap cmap = gamma_calibration(data2, "__phi", refined);
  SlackTracker tracker;
  for (const auto& e : cmap.entries) {
    double alpha_sup = -1.0;
    for (const auto& a : amap.entries) {
      if (ref.phi_map(a.level) == e.level) alpha_sup = std::max(alpha_sup, a.residual);
    }
    if (alpha_sup < 0.0) fail(ErrorCode::kInternal, "refined level with no base level");
    tracker.bound(e.residual, opt.bound_scale * k * alpha_sup + kBoundTol);
  }
  out.conclusion_holds = tracker.ok;
  out.slack = tracker.value();
  std::ostringstream detail;
  detail << "K " << k << ", base levels " << amap.entries.size() << ", refined levels "
         << cmap.entries.size();
  out.detail = detail.str();
  return out;
}

EdgeResult check_dist_inherited(const Scenario& s, const EdgeOptions& opt) {
  const PredictionDataset& data = s.data();
  const Refinement& ref = need_refinement(s);
  const Property& base = need_property(s, ref.base_property);
  const Property& refined = need_property(s, ref.refined_property);

  LevelResidualMap amap = distribution_calibration(data, "f", base).max_map;
  LevelResidualMap cmap = distribution_calibration(data, "f", refined).max_map;
  EdgeResult out;
  out.hypothesis_met = true;  // needs only finitely many distinct predictions
  SlackTracker tracker;
  for (const auto& e : cmap.entries) {
    double alpha_sup = -1.0;
    for (const auto& a : amap.entries) {
      if (ref.phi_map(a.level) == e.level) alpha_sup = std::max(alpha_sup, a.residual);
    }
    if (alpha_sup < 0.0) fail(ErrorCode::kInternal, "refined level with no base level");
    tracker.bound(e.residual, opt.bound_scale * alpha_sup + kBoundTol);
  }
  out.conclusion_holds = tracker.ok;
  out.slack = tracker.value();
  std::ostringstream detail;
  detail << "base levels " << amap.entries.size() << ", refined levels "
         << cmap.entries.size() << ", worst slack " << tracker.value();
  out.detail = detail.str();
  return out;
}

EdgeResult check_swap_for_refined(const Scenario& s, const EdgeOptions& opt) {
  const PredictionDataset& data = s.data();
  const Property& gamma = need_property(s, "gamma");
  const Refinement& ref = need_refinement(s);
  const ScenarioLoss* sl = nullptr;
  for (const auto& [name, loss] : s.losses) {
    if (loss.outcome_lipschitz_b) sl = &loss;
  }
  EdgeResult out;
  out.hypothesis_met = sl != nullptr;
  if (sl == nullptr) return out;
  double b = *sl->outcome_lipschitz_b;

  PredictionDataset data2 = with_property_column(data, "f", gamma, "__g");
  LevelResidualMap amap = gamma_calibration(data2, "__g", gamma);
  PredictionDataset data3 = data.with_derived_prediction("__phi", [&](const Record& r) {
    return ref.phi_map(r.predictions.at(ref.base_prediction));
  });
  LevelResidualMap smap = swap_regret(data3, "__phi", sl->loss, sl->grid);
  SlackTracker tracker;
  for (const auto& e : smap.entries) {
    double acc = 0.0;
    double mass = 0.0;
    for (const auto& a : amap.entries) {
      if (ref.phi_map(a.level) == e.level) {
        acc += a.weight * a.residual;
        mass += a.weight;
      }
    }
    if (mass <= 0.0) fail(ErrorCode::kInternal, "refined level with no base level");
    tracker.bound(e.residual, opt.bound_scale * 2.0 * b * (acc / mass) + kBoundTol);
  }
  out.conclusion_holds = tracker.ok;
  out.slack = tracker.value();
  std::ostringstream detail;
  detail << "B " << b << ", refined levels " << smap.entries.size() << ", worst slack "
         << tracker.value();
  out.detail = detail.str();
  return out;
}

EdgeResult check_decision_implies_bayes(const Scenario& s, const EdgeOptions& opt) {
  const PredictionDataset& data = s.data();
  EdgeResult out;
  out.hypothesis_met = !s.losses.empty();
  SlackTracker tracker;
  std::ostringstream detail;
  for (const auto& [name, sl] : s.losses) {
    auto res = decision_calibration(data, "f", {LossWithGrid{name, sl.loss, sl.grid}});
    double beta = res.at(name).beta;
    const LossFn& loss = sl.loss;
    const auto& grid = sl.grid;
    PredictionDataset data2 =
        data.with_derived_prediction("__dec", [&](const Record& r) {
              return best_response(loss, r.predictions.at("f").distribution(), grid).value;
            })
            .with_derived_prediction("__risk", [&](const Record& r) {
              return PropertyValue(
                  best_response(loss, r.predictions.at("f").distribution(), grid).expected);
            });
    double bayes = bayes_risk_estimation_residual(data2, "__dec", "__risk", loss).beta;
    tracker.bound(bayes, opt.bound_scale * beta + kBoundTol);
    detail << name << ": bayes " << bayes << " vs beta " << beta << "; ";
  }
  out.conclusion_holds = tracker.ok;
  out.slack = tracker.value();
  out.detail = detail.str();
  return out;
}

EdgeResult check_selfreal_implies_precise(const Scenario& s, const EdgeOptions& opt) {
  const PredictionDataset& data = s.data();
  const ScenarioLoss& sl = need_loss(s, "sq");

  // Group records by the (decision, risk) prediction pair.
  std::map<std::pair<PropertyValue, PropertyValue>, std::vector<std::size_t>> pairs;
  for (std::size_t i = 0; i < data.records().size(); ++i) {
    const Record& r = data.records()[i];
    pairs[{r.predictions.at("g"), r.predictions.at("h")}].push_back(i);
  }
  EdgeResult out;
  out.hypothesis_met = true;
  double bound_acc = 0.0;
  for (const auto& [key, members] : pairs) {
    std::vector<double> pooled(data.space()->size(), 0.0);
    double mass = 0.0;
    for (std::size_t i : members) {
      const Record& r = data.records()[i];
      pooled[r.y] += r.weight;
      mass += r.weight;
    }
    for (double& w : pooled) w /= mass;
    BestResponse br = best_response(sl.loss, Pmf(data.space(), pooled), sl.grid);
    // The decision coordinate must be exactly self-realizing.
    if (value_distance(ValueMetric::kAbsDiff, br.value, key.first) > kGateTol) {
      out.hypothesis_met = false;
    }
    double alpha = std::abs(br.expected - key.second.real());
    bound_acc += (mass / data.total_weight()) * alpha;
  }
  double bayes = bayes_risk_estimation_residual(data, "g", "h", sl.loss).beta;
  double limit = opt.bound_scale * bound_acc + kBoundTol;
  out.conclusion_holds = bayes <= limit;
  out.slack = limit - bayes;
  std::ostringstream detail;
  detail << "pairs " << pairs.size() << ", bayes " << bayes << " vs E|alpha| "
         << bound_acc;
  out.detail = detail.str();
  return out;
}

EdgeResult check_decision_equiv_vanilla(const Scenario& s, const EdgeOptions& opt) {
  const PredictionDataset& data = s.data();
  double vanilla_sup = sup_residual(vanilla_calibration(data, "fmean"));

  // Threshold grid: observed prediction values plus the endpoints and all
  // consecutive midpoints; interior points only (the losses need q in (0,1)).
  std::vector<double> values = {0.0, 1.0};
  for (const Level& level : data.levels("fmean")) values.push_back(level.value.real());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> qs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0 && values[i] < 1.0) qs.push_back(values[i]);
    if (i + 1 < values.size()) qs.push_back(0.5 * (values[i] + values[i + 1]));
  }

  double decision_max = 0.0;
  for (double q : qs) {
    SimpleLossPair pair = make_simple_loss(data.space(), q);
    auto res =
        decision_calibration(data, "f", {LossWithGrid{"lq", pair.loss, pair.grid}});
    decision_max = std::max(decision_max, res.at("lq").beta);
  }
  double gate = opt.bound_scale * kGateTol;
  bool lhs = vanilla_sup <= gate;
  bool rhs = decision_max <= gate;
  EdgeResult out;
  out.hypothesis_met = true;
  out.conclusion_holds = lhs == rhs;
  double margin;
  if (lhs && rhs) {
    margin = gate - std::max(vanilla_sup, decision_max);
  } else if (!lhs && !rhs) {
    margin = std::min(vanilla_sup, decision_max) - gate;
  } else {
    margin = -std::abs(vanilla_sup - decision_max);
  }
  out.slack = margin;
  std::ostringstream detail;
  detail << "vanilla sup " << vanilla_sup << ", max decision residual over " << qs.size()
         << " thresholds " << decision_max;
  out.detail = detail.str();
  return out;
}

}  // namespace

const std::vector<ImplicationEdge>& all_edges() {
  static const std::vector<ImplicationEdge> edges = {
      {EdgeKind::kDistImpliesGamma, "dist_implies_gamma"},
      {EdgeKind::kDistImpliesGammaApprox, "dist_implies_gamma_approx"},
      {EdgeKind::kDistImpliesDecision, "dist_implies_decision"},
      {EdgeKind::kDistImpliesDecisionApprox, "dist_implies_decision_approx"},
      {EdgeKind::kGammaIffSwap, "gamma_iff_swap"},
      {EdgeKind::kGammaInherited, "gamma_inherited"},
      {EdgeKind::kDistInherited, "dist_inherited"},
      {EdgeKind::kSwapForRefined, "swap_for_refined"},
      {EdgeKind::kDecisionImpliesBayes, "decision_implies_bayes"},
      {EdgeKind::kSelfrealImpliesPrecise, "selfreal_implies_precise"},
      {EdgeKind::kDecisionEquivVanillaBinary, "decision_equiv_vanilla_binary"},
  };
  return edges;
}

const ImplicationEdge& edge_by_name(const std::string& name) {
  for (const auto& e : all_edges()) {
    if (e.name == name) return e;
  }
  fail(ErrorCode::kBadParam, "unknown implication edge '" + name + "'");
}

EdgeResult check_edge(const ImplicationEdge& edge, const Scenario& scenario,
                      const EdgeOptions& options) {
  switch (edge.kind) {
    case EdgeKind::kDistImpliesGamma:
      return check_dist_implies_gamma(scenario, options, false);
    case EdgeKind::kDistImpliesGammaApprox:
      return check_dist_implies_gamma(scenario, options, true);
    case EdgeKind::kDistImpliesDecision:
      return check_dist_implies_decision(scenario, options, false);
    case EdgeKind::kDistImpliesDecisionApprox:
      return check_dist_implies_decision(scenario, options, true);
    case EdgeKind::kGammaIffSwap:
      return check_gamma_iff_swap(scenario, options);
    case EdgeKind::kGammaInherited:
      return check_gamma_inherited(scenario, options);
    case EdgeKind::kDistInherited:
      return check_dist_inherited(scenario, options);
    case EdgeKind::kSwapForRefined:
      return check_swap_for_refined(scenario, options);
    case EdgeKind::kDecisionImpliesBayes:
      return check_decision_implies_bayes(scenario, options);
    case EdgeKind::kSelfrealImpliesPrecise:
      return check_selfreal_implies_precise(scenario, options);
    case EdgeKind::kDecisionEquivVanillaBinary:
      return check_decision_equiv_vanilla(scenario, options);
  }
  fail(ErrorCode::kInternal, "unhandled edge kind");
}

}  // namespace calibatlas
