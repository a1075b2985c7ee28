// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: ten end-to-end criteria, one PASS/FAIL line each.
// Exit status 0 only when every criterion passes.
//
// Usage: acceptance --cli <calib-atlas binary> --fixtures <fixture dir>
//                   --workdir <scratch dir>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "calibatlas/dataset.hpp"
#include "calibatlas/losses.hpp"
#include "calibatlas/outcomes.hpp"
#include "calibatlas/properties.hpp"
#include "calibatlas/rng.hpp"
#include "calibatlas/value.hpp"
#include "calibatlas/verify.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::json;

namespace {

using namespace calibatlas;

struct Args {
  std::string cli;
  std::string fixtures;
  std::string workdir;
};

Args parse_args(int argc, char** argv) {
  Args a;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string key = argv[i];
    if (key == "--cli") a.cli = argv[i + 1];
    if (key == "--fixtures") a.fixtures = argv[i + 1];
    if (key == "--workdir") a.workdir = argv[i + 1];
  }
  return a;
}

PropertyValue R(double x) { return PropertyValue(x); }

double scalar(const Scenario& s, const std::string& quantity) {
  return eval_quantity(s, quantity).at(0).value;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// --- 1: planted offsets give swap regret alpha^2/2 under the induced loss ----

bool criterion_swap_half_alpha_sq() {
  const double alphas[] = {0.01, 0.05, 0.1, 0.2};
  SpacePtr space = make_numeric_space(2);
  IdentificationFn vmean = make_mean_identification(space);
  for (std::size_t t = 0; t < 200; ++t) {
    Rng rng(Rng::derive_seed(1101, t));
    std::size_t k = 4 + rng.integer(5);
    std::set<std::uint64_t> dyadics;  // gamma = j/64, kept below 3/4
    while (dyadics.size() < k) dyadics.insert(8 + rng.integer(41));

    std::vector<Record> records;
    std::vector<double> planted;
    std::vector<double> gammas;
    std::vector<PropertyValue> grid = {R(0.0), R(1.0)};
    std::size_t i = 0;
    for (std::uint64_t j : dyadics) {
      double gamma = static_cast<double>(j) / 64.0;
      double alpha = alphas[(t + i) % 4];
      double rate = gamma + alpha;  // conditional mean sits alpha above the level
      Record hi;
      hi.x_id = "u" + std::to_string(i);
      hi.y = 1;
      hi.weight = rate;
      hi.predictions.emplace("f", R(gamma));
      Record lo = hi;
      lo.y = 0;
      lo.weight = 1.0 - rate;
      records.push_back(std::move(hi));
      records.push_back(std::move(lo));
      grid.push_back(R(gamma));
      grid.push_back(R(rate));
      gammas.push_back(gamma);
      planted.push_back(alpha);
      ++i;
    }

    Scenario s;
    s.name = "planted[" + std::to_string(t) + "]";
    s.dataset = PredictionDataset(s.name, space, std::move(records));
    s.losses.emplace("vind", ScenarioLoss{loss_from_identification(vmean, 0.0, {}, 64),
                                          grid, std::nullopt});

    QuantityResult res = eval_quantity(s, "swap:f:vind");
    if (res.size() != k) return false;
    for (std::size_t l = 0; l < k; ++l) {
      if (res[l].level.real() != gammas[l]) return false;
      double want = planted[l] * planted[l] / 2.0;
      if (std::abs(res[l].value - want) > 1e-9) return false;
    }
  }
  return true;
}

// --- 2: binary vanilla calibration <=> decision calibration for every l_q ----

bool criterion_binary_equivalence() {
  SpacePtr space = make_numeric_space(2);
  std::size_t calibrated_seen = 0;
  std::size_t miscalibrated_seen = 0;
  for (std::size_t t = 0; t < 50; ++t) {
    Rng rng(Rng::derive_seed(2202, t));
    std::size_t k = 2 + rng.integer(5);
    std::set<std::uint64_t> lattice;  // predicted values j/40
    while (lattice.size() < k) lattice.insert(1 + rng.integer(39));
    bool plant_offsets = t % 2 == 1;

    std::vector<Record> records;
    std::vector<double> predicted;
    std::size_t i = 0;
    for (std::uint64_t j : lattice) {
      double p = static_cast<double>(j) / 40.0;
      double rate = p;
      if (plant_offsets) rate = std::min(p + 0.02 + 0.04 * rng.uniform(), 0.98);
      Record hi;
      hi.x_id = "u" + std::to_string(i++);
      hi.y = 1;
      hi.weight = rate;
      hi.predictions.emplace("f", PropertyValue(Pmf(space, {1.0 - p, p})));
      hi.predictions.emplace("fmean", R(p));
      Record lo = hi;
      lo.y = 0;
      lo.weight = 1.0 - rate;
      records.push_back(std::move(hi));
      records.push_back(std::move(lo));
      predicted.push_back(p);
    }

    Scenario s;
    s.name = "binary[" + std::to_string(t) + "]";
    s.dataset = PredictionDataset(s.name, space, std::move(records));

    // q grid: every predicted value, every midpoint, and the endpoints.
    std::sort(predicted.begin(), predicted.end());
    std::vector<double> qs = {0.0, 1.0};
    for (std::size_t a = 0; a < predicted.size(); ++a) {
      qs.push_back(predicted[a]);
      if (a + 1 < predicted.size()) qs.push_back((predicted[a] + predicted[a + 1]) / 2.0);
    }
    std::vector<std::string> decision_quantities;
    for (std::size_t a = 0; a < qs.size(); ++a) {
      SimpleLossPair pair = make_simple_loss(space, qs[a]);
      std::string name = "lq" + std::to_string(a);
      s.losses.emplace(name, ScenarioLoss{std::move(pair.loss), pair.grid, std::nullopt});
      decision_quantities.push_back("decision:f:" + name);
    }

    bool vanilla_ok = true;
    for (const QuantityEntry& e : eval_quantity(s, "vanilla:fmean"))
      vanilla_ok = vanilla_ok && e.value <= 1e-12;
    bool decision_ok = true;
    for (const std::string& q : decision_quantities)
      decision_ok = decision_ok && scalar(s, q) <= 1e-12;

    if (vanilla_ok != decision_ok) return false;
    if (vanilla_ok)
      ++calibrated_seen;
    else
      ++miscalibrated_seen;
  }
  return calibrated_seen >= 10 && miscalibrated_seen >= 10;
}

// --- 3..5: counterexample constructions against their closed forms -----------

bool criterion_half_predictor() {
  Scenario s = counterexample_half_predictor(0.8, 7);
  return scalar(s, "decision:f:sq") <= 1e-12 &&
         std::abs(scalar(s, "agg:sup:vanilla:fmean") - 0.3) <= 1e-12;
}

bool criterion_mean_variance() {
  Scenario s = counterexample_mean_variance(1.5, 7);
  return std::abs(scalar(s, "bayes_risk:g:h:sq")) <= 1e-9 &&
         std::abs(scalar(s, "agg:sup:gamma:g:mean") - 1.0) <= 1e-9 &&
         std::abs(scalar(s, "agg:sup:gamma:h:variance") - 1.0) <= 1e-9;
}

bool criterion_cost_parity() {
  const double c = 0.6;
  const double d = 0.3;
  const double q = 1.0 / ((1.0 - c) / d + 1.0);
  for (double f_mid : {0.32, 0.35, 0.40}) {
    Scenario s = cost_parity_construction(c, d, f_mid);

    QuantityResult vanilla = eval_quantity(s, "vanilla:f");
    if (vanilla.size() != 2) return false;
    for (const QuantityEntry& e : vanilla)
      if (e.value > 1e-12) return false;

    double bayes = (1.0 - c) * q;  // = 6/35 for c=0.6, d=0.3
    if (std::abs(bayes - 6.0 / 35.0) > 1e-15) return false;
    if (std::abs(scalar(s, "marginal_bayes_risk:lc") - bayes) > 1e-12) return false;
    if (std::abs(scalar(s, "marginal_bayes_risk:ld") - bayes) > 1e-12) return false;

    double gap = scalar(s, "cost_gap:p:lc:ld");
    double want = (1.0 - q) * std::abs(f_mid * (1.0 - c) / (1.0 - f_mid) - d);
    if (!(gap > 0.0) || std::abs(gap - want) > 1e-12) return false;
  }
  return true;
}

// --- 6: every implication edge on 200 hypothesis-satisfying scenarios --------

bool criterion_implication_edges() {
  for (const ImplicationEdge& edge : all_edges()) {
    for (std::size_t i = 0; i < 200; ++i) {
      Scenario s = make_edge_scenario(edge.kind, 6606, i);
      EdgeResult r = check_edge(edge, s);
      if (!r.hypothesis_met || !r.conclusion_holds || r.slack < 0.0) return false;
    }
  }
  return all_edges().size() == 11;
}

// --- 7: metrics agree with the brute-force oracle -----------------------------

bool criterion_oracle_agreement() {
  // 200 scenarios alternate binary / 3-outcome, so every quantity family
  // (including the binary-only ones) is cross-checked at least 100 times.
  for (std::size_t i = 0; i < 200; ++i) {
    std::vector<std::string> quantities;
    Scenario s = make_oracle_scenario(7707, i, &quantities);
    for (const std::string& q : quantities) {
      double d = max_quantity_discrepancy(eval_quantity(s, q), eval_quantity_oracle(s, q));
      if (d > 1e-12) return false;
    }
  }
  return true;
}

// --- 8: identification regularity estimates ----------------------------------

bool criterion_identification_regularity() {
  SpacePtr space = make_numeric_space(5);
  RegularityEstimate mean_est = estimate_identification_regularity(
      make_mean_identification(space), make_mean(space), 400, 8808, linspace(0.0, 4.0, 33));
  bool mean_ok = mean_est.oriented_ok && mean_est.samples > 0 &&
                 std::abs(mean_est.n_hat - 1.0) <= 1e-9 &&
                 std::abs(mean_est.m_hat - 1.0) <= 1e-9;

  std::vector<double> g = {0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> h = {0.5, 2.0, 1.0, 0.7, 1.6};  // bounded in [1/2, 2]
  RegularityEstimate ratio_est = estimate_identification_regularity(
      make_ratio_identification(space, g, h), make_ratio_of_expectations(space, g, h),
      400, 8809, linspace(0.0, 8.0, 33));
  bool ratio_ok = ratio_est.oriented_ok && ratio_est.samples > 0 &&
                  ratio_est.n_hat >= 0.5 - 1e-9 && ratio_est.m_hat <= 2.0 + 1e-9;
  return mean_ok && ratio_ok;
}

// --- 9: hyperplane recovery of full-distribution calibration ------------------

bool criterion_recovery() {
  for (std::size_t t = 0; t < 20; ++t) {
    std::size_t planted_level = 0;
    Scenario clean = make_recovery_scenario(9909, t, 0.0, &planted_level);
    RecoveryReport rc = recover_distribution_calibration(clean.data(), "f", 0.05);
    if (!rc.recovered || !rc.flagged_levels.empty() || rc.full_dist_sup > 1e-9)
      return false;

    Scenario planted = make_recovery_scenario(9909, t, 0.1, &planted_level);
    RecoveryReport rp = recover_distribution_calibration(planted.data(), "f", 0.05);
    if (!rp.recovered) return false;  // biconditional must hold on both sides
    if (rp.full_dist_sup <= 1e-9) return false;
    if (rp.flagged_levels != std::vector<std::size_t>{planted_level}) return false;
  }
  return true;
}

// --- 10: CLI end-to-end on the committed fixtures ------------------------------

int run_command(const std::string& command) {
  int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs `audit` on one fixture config; returns the quantity->aggregate map.
bool run_fixture_audit(const Args& a, const std::string& base,
                       std::map<std::string, double>* aggregates) {
  fs::path out = fs::path(a.workdir) / ("out_" + base);
  fs::create_directories(out);
  std::string cmd = "\"" + a.cli + "\" audit --config \"" + a.fixtures + "/" + base +
                    "_config.json\" --out \"" + out.string() + "\" > \"" +
                    (out / "run.log").string() + "\" 2>&1";
  if (run_command(cmd) != 0) return false;
  njson rep = njson::parse(read_file(out / "report.json"));
  for (const auto& item : rep["metrics"].items()) {
    if (item.value()["verdict"] != "pass") return false;
    (*aggregates)[item.value()["quantity"].get<std::string>()] =
        item.value()["aggregate"].get<double>();
  }
  return true;
}

bool criterion_cli_end_to_end(const Args& a) {
  if (a.cli.empty() || a.fixtures.empty() || a.workdir.empty()) return false;
  fs::create_directories(a.workdir);

  // Criterion-3 values from the committed half-predictor fixture.
  std::map<std::string, double> agg;
  if (!run_fixture_audit(a, "halfpred", &agg)) return false;
  if (agg.at("decision:f:sq") > 1e-12) return false;
  if (std::abs(agg.at("agg:sup:vanilla:fmean") - 0.3) > 1e-12) return false;

  // Criterion-4 values from the committed mean/variance fixture.
  agg.clear();
  if (!run_fixture_audit(a, "meanvar", &agg)) return false;
  if (std::abs(agg.at("bayes_risk:g:h:sq")) > 1e-9) return false;
  if (std::abs(agg.at("agg:sup:gamma:g:mean") - 1.0) > 1e-9) return false;
  if (std::abs(agg.at("agg:sup:gamma:h:variance") - 1.0) > 1e-9) return false;

  // Criterion-5 values from the three committed cost-parity fixtures.
  const double c = 0.6, d = 0.3;
  const double q = 1.0 / ((1.0 - c) / d + 1.0);
  const std::pair<const char*, double> parity[] = {
      {"costparity_f32", 0.32}, {"costparity_f35", 0.35}, {"costparity_f40", 0.40}};
  for (const auto& [base, f_mid] : parity) {
    agg.clear();
    if (!run_fixture_audit(a, base, &agg)) return false;
    if (agg.at("agg:sup:vanilla:f") > 1e-12) return false;
    if (std::abs(agg.at("marginal_bayes_risk:lc") - 6.0 / 35.0) > 1e-12) return false;
    if (std::abs(agg.at("marginal_bayes_risk:ld") - 6.0 / 35.0) > 1e-12) return false;
    double want = (1.0 - q) * std::abs(f_mid * (1.0 - c) / (1.0 - f_mid) - d);
    double gap = agg.at("cost_gap:p:lc:ld");
    if (!(gap > 0.0) || std::abs(gap - want) > 1e-12) return false;
  }

  // Usage errors are hard errors (exit 2); --help stays informational.
  fs::path usage_log = fs::path(a.workdir) / "usage.log";
  if (run_command("\"" + a.cli + "\" > \"" + usage_log.string() + "\" 2>&1") != 2)
    return false;
  if (run_command("\"" + a.cli + "\" audit > \"" + usage_log.string() + "\" 2>&1") != 2)
    return false;
  if (run_command("\"" + a.cli + "\" --help > \"" + usage_log.string() + "\" 2>&1") != 0)
    return false;

  // A config whose expectation disagrees with the data must exit 1.
  fs::path mm = fs::path(a.workdir) / "out_mismatch";
  fs::create_directories(mm);
  std::string mismatch_cmd = "\"" + a.cli + "\" audit --config \"" + a.fixtures +
                             "/halfpred_mismatch_config.json\" --out \"" + mm.string() +
                             "\" > \"" + (mm / "run.log").string() + "\" 2>&1";
  if (run_command(mismatch_cmd) != 1) return false;

  // verify all --seed 7 twice: byte-identical manifests.
  std::string manifests[2];
  for (int round = 0; round < 2; ++round) {
    fs::path out = fs::path(a.workdir) / ("verify_" + std::to_string(round));
    fs::create_directories(out);
    std::string cmd = "\"" + a.cli + "\" verify all --seed 7 --out \"" + out.string() +
                      "\" > \"" + (out / "run.log").string() + "\" 2>&1";
    if (run_command(cmd) != 0) return false;
    manifests[round] = read_file(out / "verify_all.json");
  }
  return !manifests[0].empty() && manifests[0] == manifests[1];
}

}  // namespace

int main(int argc, char** argv) {
  // Keep criterion output to one line each; clipping notices are routine here.
  setenv("CALIB_ATLAS_LOG", "error", 0);
  Args args = parse_args(argc, argv);

  struct Criterion {
    const char* label;
    std::function<bool()> run;
  };
  const Criterion criteria[] = {
      {"planted per-level offsets give swap regret alpha^2/2 (200 scenarios)",
       criterion_swap_half_alpha_sq},
      {"vanilla <=> decision calibration for every l_q (50 binary predictors)",
       criterion_binary_equivalence},
      {"half predictor: decision-calibrated, vanilla residual 0.3",
       criterion_half_predictor},
      {"mean/variance construction: exact risk estimates, unit residuals",
       criterion_mean_variance},
      {"cost parity c=0.6 d=0.3: equal Bayes risks 6/35, positive cost gap",
       criterion_cost_parity},
      {"all 11 implication edges hold on 200 scenarios each",
       criterion_implication_edges},
      {"metrics agree with the brute-force oracle within 1e-12",
       criterion_oracle_agreement},
      {"identification regularity: mean N=M=1, ratio within [1/2, 2]",
       criterion_identification_regularity},
      {"hyperplane recovery detects the planted 0.1 perturbation (20 trials)",
       criterion_recovery},
      {"CLI reproduces the committed fixtures; verify manifests byte-stable",
       [&] { return criterion_cli_end_to_end(args); }},
  };

  int passed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    bool ok = false;
    std::string note;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    std::printf("[%2d] %s  %s%s\n", index, ok ? "PASS" : "FAIL", c.label, note.c_str());
    std::fflush(stdout);
    if (ok) ++passed;
  }
  std::printf("acceptance: %d/10 criteria passed\n", passed);
  return passed == 10 ? 0 : 1;
}
