// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "calibatlas/error.hpp"
#include "calibatlas/metrics.hpp"
#include "calibatlas/verify.hpp"

namespace calibatlas {

const PredictionDataset& Scenario::data() const {
  if (!dataset) fail(ErrorCode::kEmptyDataset, "scenario '" + name + "' has no dataset");
  return *dataset;
}

namespace {

constexpr std::size_t kOracleMaxRecords = 10000;
constexpr std::size_t kOracleMaxGrid = 1000;

PropertyValue scalar_level() { return PropertyValue(std::string("(scalar)")); }

QuantityResult scalar_result(double value) {
  return {QuantityEntry{scalar_level(), 1.0, value}};
}

std::vector<std::string> split_tokens(const std::string& quantity) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : quantity) {
    if (c == ':') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] void bad_quantity(const std::string& quantity, const std::string& why) {
  fail(ErrorCode::kBadParam, "quantity '" + quantity + "': " + why);
}

const ScenarioLoss& find_loss(const Scenario& s, const std::string& name,
                              const std::string& quantity) {
  auto it = s.losses.find(name);
  if (it == s.losses.end()) bad_quantity(quantity, "unknown loss '" + name + "'");
  return it->second;
}

const Property& find_property(const Scenario& s, const std::string& name,
                              const std::string& quantity) {
  auto it = s.properties.find(name);
  if (it == s.properties.end()) bad_quantity(quantity, "unknown property '" + name + "'");
  return it->second;
}

const ScenarioIdent& find_ident(const Scenario& s, const std::string& name,
                                const std::string& quantity) {
  auto it = s.idents.find(name);
  if (it == s.idents.end()) bad_quantity(quantity, "unknown identification '" + name + "'");
  return it->second;
}

Aggregation parse_aggregation(const std::string& token, const std::string& quantity) {
  if (token == "expected") return Aggregation::kExpected;
  if (token == "expected_square") return Aggregation::kExpectedSquare;
  if (token == "sup") return Aggregation::kSup;
  bad_quantity(quantity, "unknown aggregation '" + token + "'");
}

QuantityResult from_map(const LevelResidualMap& map) {
  QuantityResult out;
  out.reserve(map.entries.size());
  for (const auto& e : map.entries) out.push_back(QuantityEntry{e.level, e.weight, e.residual});
  return out;
}

LevelResidualMap to_map(const QuantityResult& result, const std::string& name) {
  LevelResidualMap map;
  map.metric_name = name;
  for (const auto& e : result)
    map.entries.push_back(LevelResidual{e.level, e.weight, e.value});
  return map;
}

// Per-level quantity on an explicit dataset (used by group: which swaps in
// restricted datasets). Scalar quantities are rejected inside group:/agg:.
QuantityResult eval_per_level(const Scenario& s, const PredictionDataset& data,
                              const std::vector<std::string>& t, const std::string& quantity) {
  if (t.empty()) bad_quantity(quantity, "empty per-level quantity");
  const std::string& head = t[0];
  if (head == "vanilla") {
    if (t.size() != 2) bad_quantity(quantity, "expected vanilla:<pred>");
    return from_map(vanilla_calibration(data, t[1]));
  }
  if (head == "gamma") {
    if (t.size() != 3) bad_quantity(quantity, "expected gamma:<pred>:<prop>");
    return from_map(gamma_calibration(data, t[1], find_property(s, t[2], quantity)));
  }
  if (head == "dist") {
    if (t.size() != 3) bad_quantity(quantity, "expected dist:<pred>:<prop>");
    return from_map(
        distribution_calibration(data, t[1], find_property(s, t[2], quantity)).max_map);
  }
  if (head == "swap") {
    if (t.size() != 3) bad_quantity(quantity, "expected swap:<pred>:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[2], quantity);
    return from_map(swap_regret(data, t[1], sl.loss, sl.grid));
  }
  bad_quantity(quantity, "'" + head + "' is not a per-level quantity");
}

QuantityResult eval_on(const Scenario& s, const std::string& quantity) {
  const PredictionDataset& data = s.data();
  std::vector<std::string> t = split_tokens(quantity);
  const std::string& head = t[0];
  if (head == "vanilla" || head == "gamma" || head == "dist" || head == "swap") {
    return eval_per_level(s, data, t, quantity);
  }
  if (head == "decision" || head == "decision_signed") {
    if (t.size() != 3) bad_quantity(quantity, "expected decision:<pred>:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[2], quantity);
    auto res = decision_calibration(data, t[1], {LossWithGrid{t[2], sl.loss, sl.grid}});
    const DecisionResidual& r = res.at(t[2]);
    return scalar_result(head == "decision" ? r.beta : r.signed_value);
  }
  if (head == "bayes_risk" || head == "bayes_risk_signed") {
    if (t.size() != 4) bad_quantity(quantity, "expected bayes_risk:<g>:<h>:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[3], quantity);
    DecisionResidual r = bayes_risk_estimation_residual(data, t[1], t[2], sl.loss);
    return scalar_result(head == "bayes_risk" ? r.beta : r.signed_value);
  }
  if (head == "marginal_bayes_risk") {
    if (t.size() != 2) bad_quantity(quantity, "expected marginal_bayes_risk:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[1], quantity);
    return scalar_result(marginal_bayes_risk(data, sl.loss, sl.grid));
  }
  if (head == "downstream_cost") {
    if (t.size() != 3) bad_quantity(quantity, "expected downstream_cost:<pred>:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[2], quantity);
    return scalar_result(downstream_cost(data, t[1], sl.loss, sl.grid));
  }
  if (head == "cost_gap") {
    if (t.size() != 4) bad_quantity(quantity, "expected cost_gap:<pred>:<loss1>:<loss2>");
    const ScenarioLoss& a = find_loss(s, t[2], quantity);
    const ScenarioLoss& b = find_loss(s, t[3], quantity);
    return scalar_result(std::abs(downstream_cost(data, t[1], a.loss, a.grid) -
                                  downstream_cost(data, t[1], b.loss, b.grid)));
  }
  if (head == "agg") {
    if (t.size() < 3) bad_quantity(quantity, "expected agg:<mode>:<quantity...>");
    Aggregation mode = parse_aggregation(t[1], quantity);
    std::vector<std::string> rest(t.begin() + 2, t.end());
    QuantityResult inner = eval_per_level(s, data, rest, quantity);
    return scalar_result(aggregate(to_map(inner, quantity), mode));
  }
  if (head == "group") {
    if (t.size() < 4) bad_quantity(quantity, "expected group:<group>:<mode>:<quantity...>");
    Aggregation mode = parse_aggregation(t[2], quantity);
    std::vector<std::string> rest(t.begin() + 3, t.end());
    GroupMetricResult res = group_metric(
        data, t[1],
        [&](const PredictionDataset& part) {
          return to_map(eval_per_level(s, part, rest, quantity), quantity);
        },
        mode);
    return scalar_result(res.sup_aggregate);
  }
  if (head == "robust_swap_raw" || head == "robust_swap_norm") {
    if (t.size() != 3) bad_quantity(quantity, "expected robust_swap_raw:<pred>:<ident>");
    const ScenarioIdent& si = find_ident(s, t[2], quantity);
    std::vector<std::string> groups = data.group_names();
    RobustSwapResult res =
        robust_swap_regret(data, t[1], si.v, groups, si.grid, si.gamma0, si.n_quad);
    return scalar_result(head == "robust_swap_raw" ? res.raw_sup : res.normalized_sup);
  }
  bad_quantity(quantity, "unknown quantity head '" + head + "'");
}

// ---------------------------------------------------------------------------
// Oracle: direct summation over records. Everything below deliberately avoids
// the calibration-metric operations; only record access, loss/property
// evaluation, and the grids are shared with the library path.

struct OracleRecord {
  std::size_t y = 0;
  double weight = 1.0;
  const std::map<std::string, PropertyValue>* preds = nullptr;
  const std::map<std::string, bool>* groups = nullptr;
};

std::vector<OracleRecord> oracle_records(const PredictionDataset& data) {
  std::vector<OracleRecord> out;
  out.reserve(data.size());
  for (const Record& r : data.records())
    out.push_back(OracleRecord{r.y, r.weight, &r.predictions, &r.groups});
  return out;
}

double oracle_distance(ValueMetric metric, const PropertyValue& a, const PropertyValue& b) {
  if (a.kind() != b.kind()) {
    fail(ErrorCode::kKindMismatch, "oracle distance across value kinds");
  }
  switch (metric) {
    case ValueMetric::kAbsDiff:
      return std::abs(a.real() - b.real());
    case ValueMetric::kDiscrete:
      return a == b ? 0.0 : 1.0;
    case ValueMetric::kTotalVariation: {
      const Pmf& p = a.distribution();
      const Pmf& q = b.distribution();
      double acc = 0.0;
      for (std::size_t y = 0; y < p.size(); ++y) acc += std::abs(p[y] - q[y]);
      return 0.5 * acc;
    }
  }
  fail(ErrorCode::kInternal, "unreachable metric");
}

// Groups record indices by an arbitrary level key, in key-sorted order.
std::map<PropertyValue, std::vector<std::size_t>> group_by(
    const std::vector<OracleRecord>& recs,
    const std::function<PropertyValue(const OracleRecord&)>& key) {
  std::map<PropertyValue, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < recs.size(); ++i) out[key(recs[i])].push_back(i);
  return out;
}

double total_weight_of(const std::vector<OracleRecord>& recs) {
  double w = 0.0;
  for (const auto& r : recs) w += r.weight;
  return w;
}

std::vector<double> conditional_weights(const std::vector<OracleRecord>& recs,
                                        const std::vector<std::size_t>& members,
                                        std::size_t n_outcomes, double* level_weight) {
  std::vector<double> num(n_outcomes, 0.0);
  double denom = 0.0;
  for (std::size_t i : members) {
    num[recs[i].y] += recs[i].weight;
    denom += recs[i].weight;
  }
  for (double& x : num) x /= denom;
  *level_weight = denom;
  return num;
}

std::size_t oracle_argmin(const LossFn& loss, const std::vector<double>& pmf,
                          const std::vector<PropertyValue>& grid) {
  if (grid.empty()) fail(ErrorCode::kEmptyGrid, "oracle argmin over empty grid");
  std::size_t best = 0;
  double best_val = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double v = 0.0;
    for (std::size_t y = 0; y < pmf.size(); ++y) v += pmf[y] * loss.eval(y, grid[g]);
    if (g == 0 || v < best_val) {
      best = g;
      best_val = v;
    }
  }
  return best;
}

double oracle_expected_loss(const LossFn& loss, const std::vector<double>& pmf,
                            const PropertyValue& v) {
  double acc = 0.0;
  for (std::size_t y = 0; y < pmf.size(); ++y) acc += pmf[y] * loss.eval(y, v);
  return acc;
}

void oracle_size_guard(const Scenario& s, const std::string& quantity) {
  const PredictionDataset& data = s.data();
  if (data.size() > kOracleMaxRecords) {
    fail(ErrorCode::kTooLarge, "oracle refuses " + std::to_string(data.size()) + " records");
  }
  std::vector<std::string> t = split_tokens(quantity);
  for (const auto& tok : t) {
    auto it = s.losses.find(tok);
    if (it != s.losses.end() && it->second.grid.size() > kOracleMaxGrid) {
      fail(ErrorCode::kTooLarge, "oracle refuses a grid of " +
                                     std::to_string(it->second.grid.size()) + " points");
    }
  }
}

QuantityResult oracle_per_level(const Scenario& s, const std::vector<OracleRecord>& recs,
                                const SpacePtr& space, const std::vector<std::string>& t,
                                const std::string& quantity);

QuantityResult oracle_vanilla(const std::vector<OracleRecord>& recs, const SpacePtr& space,
                              const std::string& pred) {
  double total = total_weight_of(recs);
  auto levels = group_by(recs, [&](const OracleRecord& r) { return r.preds->at(pred); });
  QuantityResult out;
  for (const auto& [level, members] : levels) {
    double lw = 0.0;
    std::vector<double> cond = conditional_weights(recs, members, space->size(), &lw);
    double mean = 0.0;
    for (std::size_t y = 0; y < cond.size(); ++y) mean += cond[y] * space->value_of(y);
    out.push_back(QuantityEntry{level, lw / total, std::abs(mean - level.real())});
  }
  return out;
}

QuantityResult oracle_gamma(const Scenario& s, const std::vector<OracleRecord>& recs,
                            const SpacePtr& space, const std::string& pred,
                            const std::string& prop_name, const std::string& quantity) {
  const Property& prop = find_property(s, prop_name, quantity);
  double total = total_weight_of(recs);
  auto levels = group_by(recs, [&](const OracleRecord& r) { return r.preds->at(pred); });
  QuantityResult out;
  for (const auto& [level, members] : levels) {
    double lw = 0.0;
    std::vector<double> cond = conditional_weights(recs, members, space->size(), &lw);
    PropertyValue got = prop.evaluator(Pmf(space, cond));
    out.push_back(
        QuantityEntry{level, lw / total, oracle_distance(prop.value_metric, got, level)});
  }
  return out;
}

QuantityResult oracle_dist(const Scenario& s, const std::vector<OracleRecord>& recs,
                           const SpacePtr& space, const std::string& pred,
                           const std::string& prop_name, const std::string& quantity) {
  const Property& prop = find_property(s, prop_name, quantity);
  double total = total_weight_of(recs);
  auto levels = group_by(recs, [&](const OracleRecord& r) {
    return prop.evaluator(r.preds->at(pred).distribution());
  });
  QuantityResult out;
  for (const auto& [level, members] : levels) {
    double lw = 0.0;
    std::vector<double> cond = conditional_weights(recs, members, space->size(), &lw);
    std::vector<double> avg(space->size(), 0.0);
    for (std::size_t i : members) {
      const Pmf& f = recs[i].preds->at(pred).distribution();
      for (std::size_t y = 0; y < avg.size(); ++y) avg[y] += recs[i].weight * f[y];
    }
    double worst = 0.0;
    for (std::size_t y = 0; y < avg.size(); ++y) {
      worst = std::max(worst, std::abs(cond[y] - avg[y] / lw));
    }
    out.push_back(QuantityEntry{level, lw / total, worst});
  }
  return out;
}

QuantityResult oracle_swap(const Scenario& s, const std::vector<OracleRecord>& recs,
                           const SpacePtr& space, const std::string& pred,
                           const std::string& loss_name, const std::string& quantity) {
  const ScenarioLoss& sl = find_loss(s, loss_name, quantity);
  double total = total_weight_of(recs);
  auto levels = group_by(recs, [&](const OracleRecord& r) { return r.preds->at(pred); });
  QuantityResult out;
  for (const auto& [level, members] : levels) {
    double lw = 0.0;
    std::vector<double> cond = conditional_weights(recs, members, space->size(), &lw);
    double incurred = oracle_expected_loss(sl.loss, cond, level);
    std::size_t best = oracle_argmin(sl.loss, cond, sl.grid);
    double best_val = oracle_expected_loss(sl.loss, cond, sl.grid[best]);
    out.push_back(QuantityEntry{level, lw / total, std::max(0.0, incurred - best_val)});
  }
  return out;
}

QuantityResult oracle_per_level(const Scenario& s, const std::vector<OracleRecord>& recs,
                                const SpacePtr& space, const std::vector<std::string>& t,
                                const std::string& quantity) {
  if (t.empty()) bad_quantity(quantity, "empty per-level quantity");
  const std::string& head = t[0];
  if (head == "vanilla" && t.size() == 2) return oracle_vanilla(recs, space, t[1]);
  if (head == "gamma" && t.size() == 3) return oracle_gamma(s, recs, space, t[1], t[2], quantity);
  if (head == "dist" && t.size() == 3) return oracle_dist(s, recs, space, t[1], t[2], quantity);
  if (head == "swap" && t.size() == 3) return oracle_swap(s, recs, space, t[1], t[2], quantity);
  bad_quantity(quantity, "'" + head + "' is not a per-level quantity");
}

double oracle_aggregate(const QuantityResult& entries, Aggregation mode,
                        const std::string& quantity) {
  if (entries.empty()) bad_quantity(quantity, "aggregate over empty result");
  if (mode == Aggregation::kSup) {
    double best = 0.0;
    for (const auto& e : entries) best = std::max(best, e.value);
    return best;
  }
  double total = 0.0, acc = 0.0;
  for (const auto& e : entries) {
    total += e.weight;
    acc += e.weight * (mode == Aggregation::kExpectedSquare ? e.value * e.value : e.value);
  }
  return acc / total;
}

// Induced loss evaluated directly from the identification function.
double oracle_induced_loss(const ScenarioIdent& si, std::size_t y, double gamma) {
  if (si.v.integral) return (*si.v.integral)(y, si.gamma0, gamma);
  // Composite trapezoid over [gamma0, gamma].
  double a = si.gamma0, b = gamma;
  std::size_t n = si.n_quad == 0 ? 1 : si.n_quad;
  double h = (b - a) / static_cast<double>(n);
  double acc = 0.5 * (si.v.eval(y, a) + si.v.eval(y, b));
  for (std::size_t i = 1; i < n; ++i) acc += si.v.eval(y, a + h * static_cast<double>(i));
  return acc * h;
}

QuantityResult oracle_on(const Scenario& s, const std::string& quantity) {
  oracle_size_guard(s, quantity);
  const PredictionDataset& data = s.data();
  const SpacePtr& space = data.space();
  std::vector<OracleRecord> recs = oracle_records(data);
  std::vector<std::string> t = split_tokens(quantity);
  const std::string& head = t[0];
  if (head == "vanilla" || head == "gamma" || head == "dist" || head == "swap") {
    return oracle_per_level(s, recs, space, t, quantity);
  }
  if (head == "decision" || head == "decision_signed") {
    if (t.size() != 3) bad_quantity(quantity, "expected decision:<pred>:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[2], quantity);
    double acc = 0.0, total = 0.0;
    for (const auto& r : recs) {
      const Pmf& f = r.preds->at(t[1]).distribution();
      std::size_t g = oracle_argmin(sl.loss, f.weights(), sl.grid);
      double hypothetical = oracle_expected_loss(sl.loss, f.weights(), sl.grid[g]);
      acc += r.weight * (sl.loss.eval(r.y, sl.grid[g]) - hypothetical);
      total += r.weight;
    }
    double signed_value = acc / total;
    return scalar_result(head == "decision" ? std::abs(signed_value) : signed_value);
  }
  if (head == "bayes_risk" || head == "bayes_risk_signed") {
    if (t.size() != 4) bad_quantity(quantity, "expected bayes_risk:<g>:<h>:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[3], quantity);
    double acc = 0.0, total = 0.0;
    for (const auto& r : recs) {
      acc += r.weight * (sl.loss.eval(r.y, r.preds->at(t[1])) - r.preds->at(t[2]).real());
      total += r.weight;
    }
    double signed_value = acc / total;
    return scalar_result(head == "bayes_risk" ? std::abs(signed_value) : signed_value);
  }
  if (head == "marginal_bayes_risk") {
    if (t.size() != 2) bad_quantity(quantity, "expected marginal_bayes_risk:<loss>");
    const ScenarioLoss& sl = find_loss(s, t[1], quantity);
    std::vector<double> marginal(space->size(), 0.0);
    double total = 0.0;
    for (const auto& r : recs) {
      marginal[r.y] += r.weight;
      total += r.weight;
    }
    for (double& x : marginal) x /= total;
    std::size_t g = oracle_argmin(sl.loss, marginal, sl.grid);
    return scalar_result(oracle_expected_loss(sl.loss, marginal, sl.grid[g]));
  }
  if (head == "downstream_cost" || head == "cost_gap") {
    auto one_cost = [&](const std::string& loss_name) {
      const ScenarioLoss& sl = find_loss(s, loss_name, quantity);
      double acc = 0.0, total = 0.0;
      for (const auto& r : recs) {
        const Pmf& f = r.preds->at(t[1]).distribution();
        std::size_t g = oracle_argmin(sl.loss, f.weights(), sl.grid);
        acc += r.weight * sl.loss.eval(r.y, sl.grid[g]);
        total += r.weight;
      }
      return acc / total;
    };
    if (head == "downstream_cost") {
      if (t.size() != 3) bad_quantity(quantity, "expected downstream_cost:<pred>:<loss>");
      return scalar_result(one_cost(t[2]));
    }
    if (t.size() != 4) bad_quantity(quantity, "expected cost_gap:<pred>:<loss1>:<loss2>");
    return scalar_result(std::abs(one_cost(t[2]) - one_cost(t[3])));
  }
  if (head == "agg") {
    if (t.size() < 3) bad_quantity(quantity, "expected agg:<mode>:<quantity...>");
    Aggregation mode = parse_aggregation(t[1], quantity);
    std::vector<std::string> rest(t.begin() + 2, t.end());
    return scalar_result(
        oracle_aggregate(oracle_per_level(s, recs, space, rest, quantity), mode, quantity));
  }
  if (head == "group") {
    if (t.size() < 4) bad_quantity(quantity, "expected group:<group>:<mode>:<quantity...>");
    Aggregation mode = parse_aggregation(t[2], quantity);
    std::vector<std::string> rest(t.begin() + 3, t.end());
    bool any = false;
    double sup = 0.0;
    for (bool flag : {true, false}) {
      std::vector<OracleRecord> part;
      for (const auto& r : recs)
        if (r.groups->at(t[1]) == flag) part.push_back(r);
      if (part.empty()) continue;
      double agg =
          oracle_aggregate(oracle_per_level(s, part, space, rest, quantity), mode, quantity);
      sup = any ? std::max(sup, agg) : agg;
      any = true;
    }
    if (!any) fail(ErrorCode::kEmptyGroup, "group '" + t[1] + "' has no populated side");
    return scalar_result(sup);
  }
  if (head == "robust_swap_raw" || head == "robust_swap_norm") {
    if (t.size() != 3) bad_quantity(quantity, "expected robust_swap_raw:<pred>:<ident>");
    const ScenarioIdent& si = find_ident(s, t[2], quantity);
    double total = total_weight_of(recs);
    bool any = false;
    double raw_sup = 0.0, norm_sup = 0.0;
    for (const std::string& group : data.group_names()) {
      std::vector<OracleRecord> part;
      for (const auto& r : recs)
        if (r.groups->at(group)) part.push_back(r);
      if (part.empty()) fail(ErrorCode::kEmptyGroup, "group '" + group + "' side 1 is empty");
      double pw = total_weight_of(part);
      double incurred = 0.0;
      for (const auto& r : part) {
        incurred += r.weight * oracle_induced_loss(si, r.y, r.preds->at(t[1]).real());
      }
      incurred /= pw;
      auto levels = group_by(part, [&](const OracleRecord& r) { return r.preds->at(t[1]); });
      double best = 0.0;
      for (const auto& [level, members] : levels) {
        double lw = 0.0;
        std::vector<double> cond = conditional_weights(part, members, space->size(), &lw);
        double best_val = 0.0;
        for (std::size_t g = 0; g < si.grid.size(); ++g) {
          double v = 0.0;
          for (std::size_t y = 0; y < cond.size(); ++y) {
            v += cond[y] * oracle_induced_loss(si, y, si.grid[g].real());
          }
          if (g == 0 || v < best_val) best_val = v;
        }
        best += (lw / pw) * best_val;
      }
      double raw = std::max(0.0, incurred - best);
      double norm = raw * (pw / total);
      raw_sup = any ? std::max(raw_sup, raw) : raw;
      norm_sup = any ? std::max(norm_sup, norm) : norm;
      any = true;
    }
    if (!any) fail(ErrorCode::kEmptyMap, "robust swap regret needs at least one group");
    return scalar_result(head == "robust_swap_raw" ? raw_sup : norm_sup);
  }
  bad_quantity(quantity, "unknown quantity head '" + head + "'");
}

}  // namespace

QuantityResult eval_quantity(const Scenario& scenario, const std::string& quantity) {
  return eval_on(scenario, quantity);
}

QuantityResult eval_quantity_oracle(const Scenario& scenario, const std::string& quantity) {
  return oracle_on(scenario, quantity);
}

double max_quantity_discrepancy(const QuantityResult& a, const QuantityResult& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::kInternal, "quantity results disagree on the number of levels: " +
                                   std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  std::map<PropertyValue, double> lhs;
  for (const auto& e : a) lhs.emplace(e.level, e.value);
  double worst = 0.0;
  for (const auto& e : b) {
    auto it = lhs.find(e.level);
    if (it == lhs.end()) {
      fail(ErrorCode::kInternal, "quantity results disagree on level " + e.level.to_string());
    }
    worst = std::max(worst, std::abs(it->second - e.value));
  }
  return worst;
}

}  // namespace calibatlas
