// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "calibatlas/verify.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace calibatlas;
using testutil::thrown_code;

TEST_SUITE("verify") {

TEST_CASE("edge catalog exposes stable names") {
  CHECK(all_edges().size() == 11);
  CHECK(edge_by_name("gamma_iff_swap").kind == EdgeKind::kGammaIffSwap);
  CHECK(edge_by_name("dist_implies_gamma").kind == EdgeKind::kDistImpliesGamma);
  CHECK(thrown_code([] { edge_by_name("no_such_edge"); }) == ErrorCode::kBadParam);
}

TEST_CASE("every implication edge holds on its generated scenarios") {
  for (const ImplicationEdge& edge : all_edges()) {
    for (std::size_t index = 0; index < 3; ++index) {
      CAPTURE(edge.name);
      CAPTURE(index);
      Scenario s = make_edge_scenario(edge.kind, 21, index);
      EdgeResult r = check_edge(edge, s);
      CHECK(r.hypothesis_met);
      CHECK(r.conclusion_holds);
      CHECK(r.slack >= 0.0);
      for (const ExpectedQuantity& eq : s.expected) {
        CAPTURE(eq.name);
        QuantityResult qr = eval_quantity(s, eq.quantity);
        REQUIRE_FALSE(qr.empty());
        CHECK(std::abs(qr[0].value - eq.value) <= eq.tolerance);
      }
    }
  }
}

TEST_CASE("a tampered bound constant is reported with negative slack") {
  const ImplicationEdge& edge = edge_by_name("dist_implies_gamma_approx");
  EdgeOptions tampered;
  tampered.bound_scale = 1e-6;
  std::size_t violations = 0;
  for (std::size_t index = 0; index < 10; ++index) {
    Scenario s = make_edge_scenario(edge.kind, 21, index);
    EdgeResult honest = check_edge(edge, s);
    CHECK(honest.conclusion_holds);
    EdgeResult r = check_edge(edge, s, tampered);
    if (!r.conclusion_holds) {
      CHECK(r.slack < 0.0);
      ++violations;
    }
  }
  CHECK(violations > 0);
}

TEST_CASE("counterexample constructions deliver their advertised quantities") {
  std::vector<Scenario> scenarios;
  scenarios.push_back(counterexample_half_predictor(0.8, 7));
  scenarios.push_back(counterexample_mean_variance(1.5, 7));
  scenarios.push_back(cost_parity_construction(0.6, 0.3, 0.35));
  for (const Scenario& s : scenarios) {
    CHECK_FALSE(s.expected.empty());
    for (const ExpectedQuantity& eq : s.expected) {
      CAPTURE(s.name);
      CAPTURE(eq.name);
      QuantityResult qr = eval_quantity(s, eq.quantity);
      REQUIRE_FALSE(qr.empty());
      CHECK(std::abs(qr[0].value - eq.value) <= eq.tolerance);
    }
  }

  // Hard literals, independent of the declared expectations.
  Scenario half = counterexample_half_predictor(0.8, 7);
  CHECK(eval_quantity(half, "decision:f:sq")[0].value <= 1e-12);
  CHECK(eval_quantity(half, "agg:sup:vanilla:fmean")[0].value ==
        doctest::Approx(0.3).epsilon(1e-12));
  Scenario cost = cost_parity_construction(0.6, 0.3, 0.35);
  CHECK(eval_quantity(cost, "cost_gap:p:lc:ld")[0].value > 0.0);
  CHECK(eval_quantity(cost, "marginal_bayes_risk:lc")[0].value ==
        doctest::Approx(6.0 / 35).epsilon(1e-12));
  CHECK(eval_quantity(cost, "marginal_bayes_risk:ld")[0].value ==
        doctest::Approx(6.0 / 35).epsilon(1e-12));

  CHECK(thrown_code([] { counterexample_half_predictor(1.5, 3); }) == ErrorCode::kBadParam);
  CHECK(thrown_code([] { counterexample_mean_variance(9.0, 7); }) ==
        ErrorCode::kUnrealizable);
  CHECK(thrown_code([] { cost_parity_construction(0.3, 0.6, 0.35); }) ==
        ErrorCode::kBadParam);
}

TEST_CASE("metric evaluation agrees with the brute-force oracle") {
  for (std::size_t index = 0; index < 8; ++index) {
    std::vector<std::string> quantities;
    Scenario s = make_oracle_scenario(20250814, index, &quantities);
    CHECK_FALSE(quantities.empty());
    for (const std::string& q : quantities) {
      CAPTURE(index);
      CAPTURE(q);
      QuantityResult fast = eval_quantity(s, q);
      QuantityResult slow = eval_quantity_oracle(s, q);
      CHECK(max_quantity_discrepancy(fast, slow) <= 1e-12);
    }
  }
}

TEST_CASE("quantity parsing rejects unknown tokens before evaluation") {
  Scenario s = counterexample_half_predictor(0.8, 3);
  CHECK(thrown_code([&] { eval_quantity(s, "nonsense:f"); }) == ErrorCode::kBadParam);
  CHECK(thrown_code([&] { eval_quantity(s, "swap:fmean:no_such_loss"); }) ==
        ErrorCode::kBadParam);
  CHECK(thrown_code([&] { eval_quantity(s, "agg:median:vanilla:fmean"); }) ==
        ErrorCode::kBadParam);
  CHECK(thrown_code([&] { eval_quantity(s, ""); }) == ErrorCode::kBadParam);
}

TEST_CASE("level mismatches between quantity results are internal errors") {
  QuantityResult a = {{PropertyValue(0.5), 1.0, 0.1}};
  QuantityResult b = {{PropertyValue(0.7), 1.0, 0.1}};
  CHECK(thrown_code([&] { max_quantity_discrepancy(a, b); }) == ErrorCode::kInternal);
  QuantityResult c = {{PropertyValue(0.5), 1.0, 0.1}, {PropertyValue(0.7), 1.0, 0.1}};
  CHECK(thrown_code([&] { max_quantity_discrepancy(a, c); }) == ErrorCode::kInternal);
  CHECK(max_quantity_discrepancy(a, a) == 0.0);
}

TEST_CASE("hyperplane recovery flags exactly the planted level") {
  for (std::size_t index : {0, 3, 9}) {
    CAPTURE(index);
    std::size_t planted = 99;
    Scenario clean = make_recovery_scenario(33, index, 0.0, &planted);
    RecoveryReport cr = recover_distribution_calibration(clean.data(), "f", 0.05);
    CHECK(cr.recovered);
    CHECK(cr.flagged_levels.empty());
    CHECK(cr.full_dist_sup <= 1e-9);

    Scenario bad = make_recovery_scenario(33, index, 0.1, &planted);
    RecoveryReport br = recover_distribution_calibration(bad.data(), "f", 0.05);
    // The biconditional holds: full calibration fails and a pair flags it.
    CHECK(br.recovered);
    REQUIRE(br.flagged_levels.size() == 1);
    CHECK(br.flagged_levels[0] == planted);
    CHECK(br.full_dist_sup == doctest::Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("impossible separation margins are reported, not absorbed") {
  SpacePtr s3 = make_numeric_space(3);
  std::vector<Record> rs;
  for (int i = 0; i < 2; ++i) {
    Record r;
    r.x_id = "x" + std::to_string(i);
    r.y = static_cast<std::size_t>(i);
    r.weight = 1.0;
    r.predictions.emplace(
        "f", PropertyValue(Pmf(s3, {0.4 + 0.05 * i, 0.3, 0.3 - 0.05 * i})));
    rs.push_back(std::move(r));
  }
  PredictionDataset d("close_pair", s3, std::move(rs));
  CHECK(thrown_code([&] { recover_distribution_calibration(d, "f", 0.9); }) ==
        ErrorCode::kSeparationFailure);
}

}  // TEST_SUITE
