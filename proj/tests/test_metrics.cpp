// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "calibatlas/metrics.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace calibatlas;
using testutil::thrown_code;

namespace {

PropertyValue tok(const char* t) { return PropertyValue(std::string(t)); }

Record rec(const std::string& id, std::size_t y, double w,
           std::map<std::string, PropertyValue> preds,
           std::map<std::string, bool> groups = {}) {
  Record r;
  r.x_id = id;
  r.y = y;
  r.weight = w;
  r.predictions = std::move(preds);
  r.groups = std::move(groups);
  return r;
}

std::vector<PropertyValue> real_grid(const std::vector<double>& vs) {
  std::vector<PropertyValue> out;
  for (double v : vs) out.push_back(PropertyValue(v));
  return out;
}

// Two-level binary dataset: level 0.7 has conditional rate 0.6 (residual
// 0.1), level 0.2 has conditional rate 1 (residual 0.8); equal level weights.
PredictionDataset two_level_binary() {
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 0.6, {{"f", PropertyValue(0.7)}}));
  rs.push_back(rec("b", 0, 0.4, {{"f", PropertyValue(0.7)}}));
  rs.push_back(rec("c", 1, 1.0, {{"f", PropertyValue(0.2)}}));
  return PredictionDataset("two_level", s, std::move(rs));
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("construction validates records") {
  SpacePtr s = make_numeric_space(2);
  CHECK(thrown_code([&] { PredictionDataset("d", s, {}); }) == ErrorCode::kEmptyDataset);
  CHECK(thrown_code([&] {
          PredictionDataset("d", s, {rec("a", 5, 1.0, {})});
        }) == ErrorCode::kBadParam);
  CHECK(thrown_code([&] {
          PredictionDataset("d", s, {rec("a", 0, 0.0, {})});
        }) == ErrorCode::kNegativeWeight);
  CHECK(thrown_code([&] {
          PredictionDataset("d", s,
                            {rec("a", 0, 1.0, {{"f", PropertyValue(0.5)}}),
                             rec("b", 0, 1.0, {})});
        }) == ErrorCode::kLengthMismatch);
  CHECK(thrown_code([&] {
          PredictionDataset("d", s,
                            {rec("a", 0, 1.0, {{"f", PropertyValue(0.5)}}),
                             rec("b", 0, 1.0, {{"f", tok("x")}})});
        }) == ErrorCode::kKindMismatch);
}

TEST_CASE("conditioning pools weights and reports the event share") {
  PredictionDataset d = two_level_binary();
  CHECK(d.total_weight() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.prediction_kind("f") == PropertyValue::Kind::kReal);

  ConditionedPmf c = d.condition({"f", PropertyValue(0.7), std::nullopt});
  CHECK(c.event_weight == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.pmf[1] == doctest::Approx(0.6).epsilon(1e-15));

  CHECK(thrown_code([&] { d.condition({"f", PropertyValue(0.99), std::nullopt}); }) ==
        ErrorCode::kEmptyEvent);
  CHECK(thrown_code([&] { d.condition({"g", PropertyValue(0.7), std::nullopt}); }) ==
        ErrorCode::kMissingPrediction);
  CHECK(thrown_code([&] { d.condition({"f", tok("0.7"), std::nullopt}); }) ==
        ErrorCode::kKindMismatch);
}

TEST_CASE("bin width switches matching to half-open lattice bins") {
  // Width 0.25 keeps every x/width exact, so the [k*w, (k+1)*w) cells are
  // unambiguous: 0.30 and 0.40 share cell k=1, 0.55 sits in cell k=2.
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 1.0, {{"f", PropertyValue(0.30)}}));
  rs.push_back(rec("b", 0, 1.0, {{"f", PropertyValue(0.40)}}));
  rs.push_back(rec("c", 0, 1.0, {{"f", PropertyValue(0.55)}}));
  PredictionDataset d("bins", s, std::move(rs));
  ConditionedPmf c = d.condition({"f", PropertyValue(0.30), 0.25});
  CHECK(c.event_weight == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(c.pmf[1] == doctest::Approx(0.5).epsilon(1e-15));
  // Any value inside the cell selects the same event; cells are aligned to
  // multiples of the width, not anchored at the queried value.
  ConditionedPmf same = d.condition({"f", PropertyValue(0.40), 0.25});
  CHECK(same.event_weight == doctest::Approx(c.event_weight).epsilon(1e-15));
  CHECK(same.pmf[1] == doctest::Approx(c.pmf[1]).epsilon(1e-15));
  CHECK(thrown_code([&] { d.condition({"f", PropertyValue(0.30), -0.25}); }) ==
        ErrorCode::kBadParam);
  CHECK(thrown_code([&] { d.condition({"f", PropertyValue(0.05), 0.25}); }) ==
        ErrorCode::kEmptyEvent);
}

TEST_CASE("levels appear in first-appearance order with member indices") {
  PredictionDataset d = two_level_binary();
  std::vector<Level> ls = d.levels("f");
  REQUIRE(ls.size() == 2);
  CHECK(ls[0].value == PropertyValue(0.7));
  CHECK(ls[0].weight_share == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ls[0].members == std::vector<std::size_t>{0, 1});
  CHECK(ls[1].members == std::vector<std::size_t>{2});
  ConditionedPmf c = d.condition_on_level(ls[1]);
  CHECK(c.pmf[1] == 1.0);
  CHECK(c.event_weight == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("marginal pools all records") {
  Pmf m = two_level_binary().marginal();
  CHECK(m[1] == doctest::Approx(1.6 / 2.0).epsilon(1e-15));
}

TEST_CASE("derived predictions extend a dataset without mutating it") {
  PredictionDataset d = two_level_binary();
  PredictionDataset e = d.with_derived_prediction("high", [](const Record& r) {
    return r.predictions.at("f").real() > 0.5 ? tok("yes") : tok("no");
  });
  CHECK_FALSE(d.has_prediction("high"));
  CHECK(e.prediction_kind("high") == PropertyValue::Kind::kToken);
  CHECK(e.levels("high").size() == 2);
  CHECK(thrown_code([&] {
          e.with_derived_prediction("high", [](const Record&) { return tok("x"); });
        }) == ErrorCode::kBadParam);
}

TEST_CASE("group restriction keeps raw weights") {
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 2.0, {{"f", PropertyValue(0.5)}}, {{"m", true}}));
  rs.push_back(rec("b", 0, 1.0, {{"f", PropertyValue(0.5)}}, {{"m", false}}));
  PredictionDataset d("grp", s, std::move(rs));
  PredictionDataset on = d.restrict_to_group("m", true);
  CHECK(on.size() == 1);
  CHECK(on.total_weight() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(thrown_code([&] { d.restrict_to_group("nope", true); }) == ErrorCode::kBadParam);
  std::vector<Record> one;
  one.push_back(rec("a", 1, 1.0, {}, {{"m", true}}));
  PredictionDataset all_on("one", s, std::move(one));
  CHECK(thrown_code([&] { all_on.restrict_to_group("m", false); }) == ErrorCode::kEmptyGroup);
}

}  // TEST_SUITE

TEST_SUITE("metrics") {

TEST_CASE("vanilla calibration measures per-level rate gaps") {
  LevelResidualMap m = vanilla_calibration(two_level_binary(), "f");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].level == PropertyValue(0.7));
  CHECK(m.entries[0].weight == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.entries[0].residual == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.entries[1].residual == doctest::Approx(0.8).epsilon(1e-12));

  CHECK(aggregate(m, Aggregation::kExpected) == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(aggregate(m, Aggregation::kExpectedSquare) == doctest::Approx(0.325).epsilon(1e-12));
  CHECK(aggregate(m, Aggregation::kSup) == doctest::Approx(0.8).epsilon(1e-12));

  SpacePtr s3 = make_numeric_space(3);
  std::vector<Record> rs;
  rs.push_back(rec("a", 2, 1.0, {{"f", PropertyValue(0.5)}}));
  PredictionDataset d3("tri", s3, std::move(rs));
  CHECK(thrown_code([&] { vanilla_calibration(d3, "f"); }) == ErrorCode::kNotBinary);
  SpacePtr skew = make_space({"0", "1"}, std::vector<double>{0.0, 2.0});
  std::vector<Record> rs2;
  rs2.push_back(rec("a", 1, 1.0, {{"f", PropertyValue(0.5)}}));
  PredictionDataset dskew("skew", skew, std::move(rs2));
  CHECK(thrown_code([&] { vanilla_calibration(dskew, "f"); }) == ErrorCode::kNotBinary);
}

TEST_CASE("aggregate renormalizes over the included levels") {
  LevelResidualMap m;
  m.metric_name = "hand";
  m.entries.push_back({PropertyValue(0.1), 0.2, 0.2});
  m.entries.push_back({PropertyValue(0.9), 0.4, 0.4});
  CHECK(aggregate(m, Aggregation::kExpected) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(thrown_code([] { aggregate({}, Aggregation::kSup); }) == ErrorCode::kEmptyMap);
}

TEST_CASE("gamma calibration compares the conditional property to the level") {
  LevelResidualMap m = gamma_calibration(two_level_binary(), "f",
                                         make_mean(make_numeric_space(2)));
  CHECK(m.entries[0].residual == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.entries[1].residual == doctest::Approx(0.8).epsilon(1e-12));

  // Token-valued predictions compare under the discrete metric.
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 0, 3.0, {{"m", tok("0")}}));
  rs.push_back(rec("b", 1, 1.0, {{"m", tok("0")}}));
  rs.push_back(rec("c", 0, 1.0, {{"m", tok("1")}}));
  PredictionDataset d("modes", s, std::move(rs));
  LevelResidualMap g = gamma_calibration(d, "m", make_mode(s));
  CHECK(g.entries[0].residual == 0.0);  // mode of (3/4, 1/4) is "0"
  CHECK(g.entries[1].residual == 1.0);  // predicted "1", realized mode "0"
}

TEST_CASE("distribution calibration groups by property value of the prediction") {
  SpacePtr s3 = make_numeric_space(3);
  Pmf split(s3, {0.5, 0.0, 0.5});
  Pmf point(s3, {0.0, 1.0, 0.0});
  // The two predictions swap their true conditionals: each is badly wrong,
  // but both have mean 1, so pooling by the mean hides the miss entirely.
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 1.0, {{"p", PropertyValue(split)}}));
  rs.push_back(rec("b", 0, 0.5, {{"p", PropertyValue(point)}}));
  rs.push_back(rec("c", 2, 0.5, {{"p", PropertyValue(point)}}));
  PredictionDataset d("same_mean", s3, std::move(rs));

  DistCalibrationResult by_mean = distribution_calibration(d, "p", make_mean(s3));
  REQUIRE(by_mean.max_map.entries.size() == 1);
  CHECK(by_mean.max_map.entries[0].level == PropertyValue(1.0));
  CHECK(by_mean.max_map.entries[0].residual == doctest::Approx(0.0).epsilon(1e-15));
  REQUIRE(by_mean.per_component.size() == 3);
  CHECK(by_mean.per_component[1].entries[0].residual == doctest::Approx(0.0).epsilon(1e-15));

  // Conditioning on the full distribution exposes both levels.
  DistCalibrationResult by_full = distribution_calibration(d, "p", make_full_distribution(s3));
  REQUIRE(by_full.max_map.entries.size() == 2);
  CHECK(by_full.max_map.entries[0].residual == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(by_full.max_map.entries[1].residual == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("swap regret matches the planted offset closed forms") {
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 0.5, {{"f", PropertyValue(0.4)}}));
  rs.push_back(rec("b", 0, 0.5, {{"f", PropertyValue(0.4)}}));
  PredictionDataset d("planted", s, std::move(rs));
  std::vector<PropertyValue> grid = real_grid({0.0, 0.25, 0.5, 0.75, 1.0});

  // Squared loss: predicted 0.4, conditional mean 0.5 -> regret alpha^2.
  bool clipped = true;
  LevelResidualMap sq = swap_regret(d, "f", make_squared_loss(s), grid, &clipped);
  CHECK_FALSE(clipped);
  CHECK(sq.entries[0].residual == doctest::Approx(0.01).epsilon(1e-12));

  // Loss induced by the mean identification: regret alpha^2 / 2.
  LossFn induced = loss_from_identification(make_mean_identification(s), 0.0, {}, 8);
  LevelResidualMap half = swap_regret(d, "f", induced, grid, nullptr);
  CHECK(half.entries[0].residual == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("negative swap regret from a coarse grid is clipped and flagged") {
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 0.5, {{"f", PropertyValue(0.5)}}));
  rs.push_back(rec("b", 0, 0.5, {{"f", PropertyValue(0.5)}}));
  PredictionDataset d("coarse", s, std::move(rs));
  bool clipped = false;
  LevelResidualMap m =
      swap_regret(d, "f", make_squared_loss(s), real_grid({0.4, 0.6}), &clipped);
  CHECK(clipped);
  CHECK(m.entries[0].residual == 0.0);
}

TEST_CASE("decision calibration is blind to the half predictor") {
  SpacePtr s = make_numeric_space(2);
  Pmf half(s, {0.5, 0.5});
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 0.8, {{"p", PropertyValue(half)}}));
  rs.push_back(rec("b", 0, 0.2, {{"p", PropertyValue(half)}}));
  PredictionDataset d("half", s, std::move(rs));
  std::vector<LossWithGrid> losses;
  losses.push_back({"sq", make_squared_loss(s), real_grid({0.0, 0.25, 0.5, 0.75, 1.0})});
  auto out = decision_calibration(d, "p", losses);
  CHECK(out.at("sq").beta == doctest::Approx(0.0).epsilon(1e-15));

  // A zero-one loss on a lopsided predictor is not blind.
  std::vector<Record> rs2;
  rs2.push_back(rec("a", 0, 1.0, {{"p", PropertyValue(Pmf(s, {0.4, 0.6}))}}));
  PredictionDataset d2("lop", s, std::move(rs2));
  std::vector<PropertyValue> labels = {tok("0"), tok("1")};
  std::vector<LossWithGrid> z1;
  z1.push_back({"z1", make_zero_one_loss(s), labels});
  auto out2 = decision_calibration(d2, "p", z1);
  CHECK(out2.at("z1").signed_value == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(out2.at("z1").beta == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("bayes risk estimation residual is the signed estimate gap") {
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 0.5, {{"g", PropertyValue(0.5)}, {"h", PropertyValue(0.25)}}));
  rs.push_back(rec("b", 0, 0.5, {{"g", PropertyValue(0.5)}, {"h", PropertyValue(0.25)}}));
  PredictionDataset d("bayes", s, std::move(rs));
  DecisionResidual r = bayes_risk_estimation_residual(d, "g", "h", make_squared_loss(s));
  CHECK(r.beta == doctest::Approx(0.0).epsilon(1e-15));

  std::vector<Record> rs2;
  rs2.push_back(rec("a", 1, 0.5, {{"g", PropertyValue(0.5)}, {"h", PropertyValue(0.3)}}));
  rs2.push_back(rec("b", 0, 0.5, {{"g", PropertyValue(0.5)}, {"h", PropertyValue(0.3)}}));
  PredictionDataset d2("bayes2", s, std::move(rs2));
  DecisionResidual r2 = bayes_risk_estimation_residual(d2, "g", "h", make_squared_loss(s));
  CHECK(r2.signed_value == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(r2.beta == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("group metric applies the closure to both sides") {
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  // Group on: calibrated at 0.5. Group off: residual 0.5 at level 0.5.
  rs.push_back(rec("a", 1, 1.0, {{"f", PropertyValue(0.5)}}, {{"m", true}}));
  rs.push_back(rec("b", 0, 1.0, {{"f", PropertyValue(0.5)}}, {{"m", true}}));
  rs.push_back(rec("c", 1, 1.0, {{"f", PropertyValue(0.5)}}, {{"m", false}}));
  PredictionDataset d("grp", s, std::move(rs));
  GroupMetricResult g = group_metric(
      d, "m", [](const PredictionDataset& part) { return vanilla_calibration(part, "f"); },
      Aggregation::kSup);
  CHECK(g.per_group.at("m=1").entries[0].residual == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g.per_group.at("m=0").entries[0].residual == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.sup_aggregate == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("robust swap regret normalizes by the group share") {
  SpacePtr s = make_numeric_space(2);
  std::vector<Record> rs;
  rs.push_back(rec("a", 1, 1.0, {{"f", PropertyValue(0.0)}}, {{"seg", true}}));
  rs.push_back(rec("b", 0, 1.0, {{"f", PropertyValue(0.5)}}, {{"seg", false}}));
  PredictionDataset d("rob", s, std::move(rs));
  RobustSwapResult r = robust_swap_regret(d, "f", make_mean_identification(s), {"seg"},
                                          real_grid({0.0, 0.5, 1.0}), 0.0, 8);
  // Induced mean loss, predicted 0 with conditional mean 1: regret 1/2.
  CHECK(r.per_group.at("seg").raw == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.per_group.at("seg").group_share == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.per_group.at("seg").normalized == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.raw_sup == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.normalized_sup == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("downstream cost and marginal bayes risk on a pooled coin") {
  SpacePtr s = make_numeric_space(2);
  Pmf skew(s, {0.9, 0.1});
  std::vector<Record> rs;
  rs.push_back(rec("a", 0, 0.5, {{"p", PropertyValue(skew)}}));
  rs.push_back(rec("b", 1, 0.5, {{"p", PropertyValue(skew)}}));
  PredictionDataset d("coin", s, std::move(rs));
  std::vector<PropertyValue> grid = real_grid({0.0, 0.5, 1.0});
  LossFn sq = make_squared_loss(s);
  // Best response to the skewed prediction is 0; realized loss is the rate.
  CHECK(downstream_cost(d, "p", sq, grid) == doctest::Approx(0.5).epsilon(1e-12));
  // Pooled marginal is fair, so the grid Bayes risk is 1/4 at 0.5.
  CHECK(marginal_bayes_risk(d, sq, grid) == doctest::Approx(0.25).epsilon(1e-12));
}

}  // TEST_SUITE
