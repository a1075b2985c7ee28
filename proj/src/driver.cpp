// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "calibatlas/config.hpp"
#include "calibatlas/error.hpp"
#include "calibatlas/ingest.hpp"
#include "calibatlas/metrics.hpp"
#include "calibatlas/verify.hpp"
#include "jsonout.hpp"
#include "report_internal.hpp"

namespace calibatlas {
namespace {

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

bool per_level_head(const std::string& head) {
  return head == "vanilla" || head == "gamma" || head == "dist" || head == "swap";
}

Aggregation parse_mode(const std::string& s) {
  if (s == "expected") return Aggregation::kExpected;
  if (s == "expected_square") return Aggregation::kExpectedSquare;
  return Aggregation::kSup;
}

double resolve_tolerance(const AuditConfig& config, const MetricSpec& m) {
  if (m.tolerance) return *m.tolerance;
  auto it = config.tolerances.find("default");
  if (it != config.tolerances.end()) return it->second;
  return 1e-9;
}

void set_value(const PropertyValue& v, std::optional<double>* real_slot,
               std::optional<std::string>* text_slot) {
  if (v.is_real())
    *real_slot = v.real();
  else
    *text_slot = v.to_string();
}

// Attaches reliability-diagram data (observed vs predicted per level) and the
// swap-clipping notice to an evaluated per-level metric. Row order matches
// eval_quantity output: both derive from levels() first-appearance order.
void decorate_metric(const Scenario& scenario, const std::string& metric_name,
                     const std::vector<std::string>& t, ReportMetric* rm,
                     std::vector<std::string>* warnings) {
  const PredictionDataset& data = scenario.data();
  const std::string& head = t[0];
  if (head == "vanilla") {
    std::vector<Level> levels = data.levels(t[1]);
    if (levels.size() != rm->levels.size()) return;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      rm->levels[i].predicted_real = levels[i].value.real();
      rm->levels[i].observed_real = data.condition_on_level(levels[i]).pmf.mean();
    }
    return;
  }
  if (head == "gamma") {
    const Property& prop = scenario.properties.at(t[2]);
    std::vector<Level> levels = data.levels(t[1]);
    if (levels.size() != rm->levels.size()) return;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      set_value(levels[i].value, &rm->levels[i].predicted_real, &rm->levels[i].predicted_text);
      PropertyValue observed = evaluate(prop, data.condition_on_level(levels[i]).pmf);
      set_value(observed, &rm->levels[i].observed_real, &rm->levels[i].observed_text);
    }
    return;
  }
  if (head == "dist") {
    const Property& prop = scenario.properties.at(t[2]);
    const std::string& pred = t[1];
    PredictionDataset keyed = data.with_derived_prediction(
        "__lvl", [&](const Record& r) { return evaluate(prop, r.predictions.at(pred).distribution()); });
    std::vector<Level> levels = keyed.levels("__lvl");
    if (levels.size() != rm->levels.size()) return;
    const std::size_t k = data.space()->size();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      std::vector<double> avg(k, 0.0);
      double total = 0.0;
      for (std::size_t m : levels[i].members) {
        const Record& r = keyed.records()[m];
        const Pmf& p = r.predictions.at(pred).distribution();
        for (std::size_t y = 0; y < k; ++y) avg[y] += r.weight * p[y];
        total += r.weight;
      }
      for (double& x : avg) x /= total;
      Pmf observed = keyed.condition_on_level(levels[i]).pmf;
      rm->levels[i].predicted_text = PropertyValue(Pmf(data.space(), avg)).to_string();
      rm->levels[i].observed_text = PropertyValue(observed).to_string();
      rm->levels[i].predicted_pmf = avg;
      rm->levels[i].observed_pmf = observed.weights();
    }
    return;
  }
  if (head == "swap") {
    const ScenarioLoss& sl = scenario.losses.at(t[2]);
    bool clipped = false;
    swap_regret(data, t[1], sl.loss, sl.grid, &clipped);
    if (clipped)
      warnings->push_back("metric '" + metric_name +
                          "': swap regret clipped at 0 on some level (decision grid misses the "
                          "incurred decision)");
    return;
  }
}

bool expected_quantities_pass(const Scenario& s) {
  for (const ExpectedQuantity& eq : s.expected) {
    QuantityResult r = eval_quantity(s, eq.quantity);
    if (r.empty() || std::abs(r[0].value - eq.value) > eq.tolerance) return false;
  }
  return true;
}

}  // namespace

AuditOutcome run_audit_file(const std::string& config_path) {
  AuditConfig config = parse_audit_config_file(config_path);
  IngestResult ingested = ingest(config);

  ReportDoc doc;
  doc.config_path = config.config_path;
  doc.config_hash = config_hash(config.raw_bytes);
  doc.input_path = config.input_path;
  doc.format = config.format;
  doc.seed = config.seed;
  doc.aggregation = config.aggregation;
  doc.warnings = ingested.warnings;

  Scenario scenario = scenario_from_config(config, std::move(ingested.dataset));
  Aggregation mode = parse_mode(config.aggregation);

  bool all_pass = true;
  for (const MetricSpec& m : config.metrics) {
    ReportMetric rm;
    rm.name = m.name;
    rm.quantity = m.quantity;
    rm.tolerance = resolve_tolerance(config, m);
    rm.expected = m.expected;
    std::vector<std::string> t = split_tokens(m.quantity);
    try {
      QuantityResult res = eval_quantity(scenario, m.quantity);
      for (const QuantityEntry& e : res) {
        ReportLevelRow row;
        row.level = e.level.to_string();
        row.weight = e.weight;
        row.residual = e.value;
        rm.levels.push_back(std::move(row));
      }
      double agg;
      if (per_level_head(t[0])) {
        LevelResidualMap map;
        map.metric_name = m.name;
        for (const QuantityEntry& e : res)
          map.entries.push_back(LevelResidual{e.level, e.weight, e.value});
        agg = aggregate(map, mode);
        decorate_metric(scenario, m.name, t, &rm, &doc.warnings);
      } else {
        agg = res.at(0).value;
        // Swap regret wrapped in agg:/group: still deserves the clipping note.
        std::size_t tail = t[0] == "agg" ? 2 : (t[0] == "group" ? 3 : t.size());
        if (tail < t.size() && t[tail] == "swap")
          decorate_metric(scenario, m.name, {t.begin() + tail, t.end()}, &rm, &doc.warnings);
      }
      rm.aggregate = agg;
      bool pass = m.expected ? std::abs(agg - *m.expected) <= rm.tolerance
                             : agg <= rm.tolerance;
      rm.verdict = pass ? "pass" : "fail";
      all_pass = all_pass && pass;
    } catch (const Error& e) {
      rm.verdict = "error";
      rm.error = e.what();
      doc.failed = true;
      all_pass = false;
    }
    doc.metrics.push_back(std::move(rm));
  }
  return AuditOutcome{render_report_json(doc), all_pass, doc.failed};
}

namespace {

constexpr std::size_t kEdgeScenarios = 200;
constexpr std::size_t kOracleScenarios = 200;
constexpr std::size_t kRecoveryScenarios = 20;
constexpr double kOracleTol = 1e-12;
constexpr double kRecoveryPlantedOffset = 0.1;

bool run_edges_section(JsonWriter* w, std::uint64_t seed, double bound_scale) {
  bool section_pass = true;
  w->key("edges");
  w->begin_array();
  for (const ImplicationEdge& edge : all_edges()) {
    w->begin_object();
    w->key("edge");
    w->value(edge.name);
    w->key("scenarios");
    w->value(std::uint64_t{kEdgeScenarios});
    std::size_t hypothesis_unmet = 0, violations = 0, expected_failures = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    w->key("checks");
    w->begin_array();
    for (std::size_t i = 0; i < kEdgeScenarios; ++i) {
      Scenario s = make_edge_scenario(edge.kind, seed, i);
      EdgeResult r = check_edge(edge, s, EdgeOptions{bound_scale});
      bool expected_ok = expected_quantities_pass(s);
      if (!r.hypothesis_met) ++hypothesis_unmet;
      if (!r.conclusion_holds) ++violations;
      if (!expected_ok) ++expected_failures;
      min_slack = std::min(min_slack, r.slack);
      w->begin_object();
      w->key("index");
      w->value(std::uint64_t{i});
      w->key("hypothesis_met");
      w->value(r.hypothesis_met);
      w->key("conclusion_holds");
      w->value(r.conclusion_holds);
      w->key("slack");
      w->value(r.slack);
      w->key("expected_ok");
      w->value(expected_ok);
      w->end_object();
    }
    w->end_array();
    bool pass = hypothesis_unmet == 0 && violations == 0 && expected_failures == 0 &&
                min_slack >= 0.0;
    w->key("hypothesis_unmet");
    w->value(std::uint64_t{hypothesis_unmet});
    w->key("violations");
    w->value(std::uint64_t{violations});
    w->key("expected_failures");
    w->value(std::uint64_t{expected_failures});
    w->key("min_slack");
    w->value(min_slack);
    w->key("pass");
    w->value(pass);
    w->end_object();
    section_pass = section_pass && pass;
  }
  w->end_array();
  return section_pass;
}

bool emit_counterexample(JsonWriter* w, const std::string& name, const Scenario& s) {
  bool pass = true;
  w->begin_object();
  w->key("name");
  w->value(name);
  w->key("quantities");
  w->begin_array();
  for (const ExpectedQuantity& eq : s.expected) {
    QuantityResult r = eval_quantity(s, eq.quantity);
    double value = r.at(0).value;
    bool ok = std::abs(value - eq.value) <= eq.tolerance;
    pass = pass && ok;
    w->begin_object();
    w->key("name");
    w->value(eq.name);
    w->key("quantity");
    w->value(eq.quantity);
    w->key("value");
    w->value(value);
    w->key("expected");
    w->value(eq.value);
    w->key("tolerance");
    w->value(eq.tolerance);
    w->key("pass");
    w->value(ok);
    w->end_object();
  }
  w->end_array();
  w->key("pass");
  w->value(pass);
  w->end_object();
  return pass;
}

bool run_counterexamples_section(JsonWriter* w) {
  bool section_pass = true;
  w->key("counterexamples");
  w->begin_array();
  section_pass &= emit_counterexample(w, "half_predictor", counterexample_half_predictor(0.8, 7));
  section_pass &= emit_counterexample(w, "mean_variance", counterexample_mean_variance(1.5, 7));
  const double f_mids[] = {0.32, 0.35, 0.40};
  for (double f : f_mids) {
    char name[32];
    std::snprintf(name, sizeof(name), "cost_parity_f%.2f", f);
    section_pass &= emit_counterexample(w, name, cost_parity_construction(0.6, 0.3, f));
  }
  w->end_array();
  return section_pass;
}

bool run_oracles_section(JsonWriter* w, std::uint64_t seed) {
  bool section_pass = true;
  w->key("oracles");
  w->begin_object();
  w->key("scenarios");
  w->value(std::uint64_t{kOracleScenarios});
  w->key("tolerance");
  w->value(kOracleTol);
  double worst = 0.0;
  w->key("checks");
  w->begin_array();
  for (std::size_t i = 0; i < kOracleScenarios; ++i) {
    std::vector<std::string> quantities;
    Scenario s = make_oracle_scenario(seed, i, &quantities);
    double max_disc = 0.0;
    for (const std::string& q : quantities) {
      QuantityResult a = eval_quantity(s, q);
      QuantityResult b = eval_quantity_oracle(s, q);
      max_disc = std::max(max_disc, max_quantity_discrepancy(a, b));
    }
    worst = std::max(worst, max_disc);
    bool ok = max_disc <= kOracleTol;
    section_pass = section_pass && ok;
    w->begin_object();
    w->key("index");
    w->value(std::uint64_t{i});
    w->key("quantities");
    w->value(std::uint64_t{quantities.size()});
    w->key("max_discrepancy");
    w->value(max_disc);
    w->key("pass");
    w->value(ok);
    w->end_object();
  }
  w->end_array();
  w->key("max_discrepancy");
  w->value(worst);
  w->key("pass");
  w->value(section_pass);
  w->end_object();
  return section_pass;
}

bool run_recovery_section(JsonWriter* w, std::uint64_t seed) {
  bool section_pass = true;
  w->key("recovery");
  w->begin_object();
  w->key("scenarios");
  w->value(std::uint64_t{kRecoveryScenarios});
  w->key("planted_offset");
  w->value(kRecoveryPlantedOffset);
  w->key("checks");
  w->begin_array();
  for (std::size_t i = 0; i < kRecoveryScenarios; ++i) {
    std::size_t planted_level = 0;
    Scenario clean = make_recovery_scenario(seed, i, 0.0, nullptr);
    RecoveryReport clean_rep =
        recover_distribution_calibration(clean.data(), "f", 0.05, seed);
    bool clean_ok = clean_rep.recovered && clean_rep.flagged_levels.empty();

    Scenario planted = make_recovery_scenario(seed, i, kRecoveryPlantedOffset, &planted_level);
    RecoveryReport planted_rep =
        recover_distribution_calibration(planted.data(), "f", 0.05, seed);
    bool planted_ok = planted_rep.recovered && planted_rep.flagged_levels.size() == 1 &&
                      planted_rep.flagged_levels[0] == planted_level;
    double residual = planted_rep.flagged_levels.size() == 1
                          ? planted_rep.per_hyperplane[planted_rep.flagged_levels[0]]
                                .recovered_residual
                          : 0.0;
    bool ok = clean_ok && planted_ok;
    section_pass = section_pass && ok;
    w->begin_object();
    w->key("index");
    w->value(std::uint64_t{i});
    w->key("clean_ok");
    w->value(clean_ok);
    w->key("planted_ok");
    w->value(planted_ok);
    w->key("planted_level");
    w->value(std::uint64_t{planted_level});
    w->key("recovered_residual");
    w->value(residual);
    w->end_object();
  }
  w->end_array();
  w->key("pass");
  w->value(section_pass);
  w->end_object();
  return section_pass;
}

}  // namespace

VerifyOutcome run_verify_suite(const std::string& suite, std::uint64_t seed,
                               double bound_scale) {
  bool edges = suite == "edges" || suite == "all";
  bool counterexamples = suite == "counterexamples" || suite == "all";
  bool oracles = suite == "oracles" || suite == "all";
  bool recovery = suite == "all";
  if (!edges && !counterexamples && !oracles)
    fail(ErrorCode::kBadParam,
         "unknown verify suite '" + suite + "' (edges, counterexamples, oracles, all)");

  JsonWriter w;
  w.begin_object();
  w.key("provenance");
  w.begin_object();
  w.key("tool");
  w.value(kToolName);
  w.key("version");
  w.value(kToolVersion);
  w.key("suite");
  w.value(suite);
  w.key("seed");
  w.value(seed);
  w.key("bound_scale");
  w.value(bound_scale);
  w.end_object();

  bool all_pass = true;
  if (edges) all_pass &= run_edges_section(&w, seed, bound_scale);
  if (counterexamples) all_pass &= run_counterexamples_section(&w);
  if (oracles) all_pass &= run_oracles_section(&w, seed);
  if (recovery) all_pass &= run_recovery_section(&w, seed);

  w.key("all_pass");
  w.value(all_pass);
  w.end_object();
  return VerifyOutcome{w.take(), all_pass};
}

}  // namespace calibatlas
