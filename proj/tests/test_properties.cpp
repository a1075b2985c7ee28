// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>
#include <vector>

#include "calibatlas/properties.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace calibatlas;
using testutil::thrown_code;

namespace {
PropertyValue tok(const char* t) { return PropertyValue(std::string(t)); }
}  // namespace

TEST_SUITE("properties") {

TEST_CASE("catalog values on hand-checked pmfs") {
  SpacePtr s2 = make_numeric_space(2);
  SpacePtr s3 = make_numeric_space(3);

  CHECK(evaluate(make_mean(s2), Pmf(s2, {0.25, 0.75})).real() ==
        doctest::Approx(0.75).epsilon(1e-15));
  // Smallest embedded value v with P(Y <= v) >= tau.
  CHECK(evaluate(make_quantile(s3, 0.5), Pmf(s3, {1.0 / 3, 1.0 / 3, 1.0 / 3})).real() == 1.0);
  CHECK(evaluate(make_quantile(s3, 0.9), Pmf(s3, {1.0 / 3, 1.0 / 3, 1.0 / 3})).real() == 2.0);
  // Bernoulli(3/4) variance.
  CHECK(evaluate(make_variance(s2), Pmf(s2, {0.25, 0.75})).real() ==
        doctest::Approx(0.1875).epsilon(1e-15));
  // Uniform binary: 0.5-quantile is 0, so cvar = E[max(0, Y)] / (1 - tau) = 1.
  CHECK(evaluate(make_cvar(s2, 0.5), Pmf(s2, {0.5, 0.5})).real() ==
        doctest::Approx(1.0).epsilon(1e-15));
  // E[g] / E[h] with g = (0, 1), h = (1, 2).
  CHECK(evaluate(make_ratio_of_expectations(s2, {0.0, 1.0}, {1.0, 2.0}),
                 Pmf(s2, {0.5, 0.5}))
            .real() == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("mode and ranking break ties toward earlier labels") {
  SpacePtr s3 = make_numeric_space(3);
  CHECK(evaluate(make_mode(s3), Pmf(s3, {0.4, 0.4, 0.2})) == tok("0"));
  CHECK(evaluate(make_mode(s3), Pmf(s3, {0.2, 0.3, 0.5})) == tok("2"));
  CHECK(evaluate(make_ranking(s3), Pmf(s3, {0.2, 0.5, 0.3})).ranking() ==
        std::vector<std::string>{"1", "2", "0"});
  CHECK(evaluate(make_ranking(s3), Pmf(s3, {0.4, 0.4, 0.2})).ranking() ==
        std::vector<std::string>{"0", "1", "2"});
}

TEST_CASE("simple binary property maps the boundary to b") {
  SpacePtr s2 = make_numeric_space(2);
  Property sb = make_simple_binary(s2, 0.3);
  CHECK(evaluate(sb, Pmf(s2, {0.6, 0.4})) == tok("a"));
  CHECK(evaluate(sb, Pmf(s2, {0.7, 0.3})) == tok("b"));  // P(Y=1) == q
  CHECK(evaluate(sb, Pmf(s2, {0.8, 0.2})) == tok("b"));
  CHECK(thrown_code([] { make_simple_binary(make_numeric_space(3), 0.3); }) ==
        ErrorCode::kNotBinary);
}

TEST_CASE("full distribution is the identity under total variation") {
  SpacePtr s2 = make_numeric_space(2);
  Property full = make_full_distribution(s2);
  Pmf p(s2, {0.3, 0.7});
  CHECK(evaluate(full, p) == PropertyValue(p));
  CHECK(full.value_metric == ValueMetric::kTotalVariation);
  CHECK(full.lipschitz_k == 1.0);
}

TEST_CASE("declared metadata matches the catalog") {
  SpacePtr s2 = make_numeric_space(2);
  Property mean = make_mean(s2);
  CHECK(mean.lipschitz_k == 1.0);  // embedding range on {0, 1}
  CHECK(mean.convex_level_sets == true);
  CHECK(make_variance(s2).convex_level_sets == false);
  CHECK(make_mode(s2).value_grid.has_value());
}

TEST_CASE("factory dispatches kind tokens and validates parameters") {
  SpacePtr s2 = make_numeric_space(2);
  PropertyParams params;
  params.tau = 0.25;
  CHECK(evaluate(make_standard_property(s2, "quantile", params), Pmf(s2, {0.5, 0.5})).real() ==
        0.0);
  params = {};
  params.q = 0.5;
  CHECK(make_standard_property(s2, "simple_binary", params).value_metric ==
        ValueMetric::kDiscrete);
  params = {};
  params.g = std::vector<double>{0.0, 1.0};
  params.h = std::vector<double>{1.0, 1.0};
  CHECK(evaluate(make_standard_property(s2, "ratio_of_expectations", params),
                 Pmf(s2, {0.25, 0.75}))
            .real() == doctest::Approx(0.75).epsilon(1e-15));

  CHECK(thrown_code([&] { make_standard_property(s2, "entropy", {}); }) ==
        ErrorCode::kBadParam);
  CHECK(thrown_code([&] { make_standard_property(s2, "quantile", {}); }) ==
        ErrorCode::kBadParam);
  CHECK(thrown_code([&] { make_standard_property(s2, "simple_binary", {}); }) ==
        ErrorCode::kBadParam);
  CHECK(thrown_code([] {
          make_standard_property(make_space({"a", "b"}), "mean", {});
        }) == ErrorCode::kMissingEmbedding);
}

TEST_CASE("evaluate rejects pmfs from a different space") {
  SpacePtr s2 = make_numeric_space(2);
  SpacePtr other = make_space({"x", "y"}, std::vector<double>{0.0, 1.0});
  CHECK(thrown_code([&] { evaluate(make_mean(s2), Pmf(other, {0.5, 0.5})); }) ==
        ErrorCode::kSpaceMismatch);
}

TEST_CASE("refinement maps grids and propagates Lipschitz constants") {
  SpacePtr s3 = make_numeric_space(3);
  Property mode = make_mode(s3);
  // Merge labels 0 and 1; the mapped grid deduplicates in stable order.
  Property merged = refine(mode, "coarse",
                           [](const PropertyValue& v) {
                             return v.token() == "2" ? tok("rare") : tok("common");
                           },
                           ValueMetric::kDiscrete);
  REQUIRE(merged.value_grid.has_value());
  CHECK(merged.value_grid->size() == 2);
  CHECK((*merged.value_grid)[0] == tok("common"));
  CHECK((*merged.value_grid)[1] == tok("rare"));
  CHECK(evaluate(merged, Pmf(s3, {0.1, 0.5, 0.4})) == tok("common"));
  CHECK(evaluate(merged, Pmf(s3, {0.1, 0.2, 0.7})) == tok("rare"));

  Property mean = make_mean(make_numeric_space(2));
  Property scaled = refine(mean, "scaled",
                           [](const PropertyValue& v) { return PropertyValue(2.0 * v.real()); },
                           ValueMetric::kAbsDiff, 2.0);
  CHECK(scaled.lipschitz_k == 2.0);  // base K = 1 on {0, 1}
}

TEST_CASE("thresholded mean coincides with the simple binary property") {
  SpacePtr s2 = make_numeric_space(2);
  Property mean = make_mean(s2);
  for (int qi = 1; qi < 100; ++qi) {
    double q = qi / 100.0;
    Property sb = make_simple_binary(s2, q);
    Property thresholded = refine(mean, "thresh",
                                  [q](const PropertyValue& v) {
                                    return v.real() > q ? tok("a") : tok("b");
                                  },
                                  ValueMetric::kDiscrete);
    for (int pi = 0; pi <= 100; ++pi) {
      double p1 = pi / 100.0;
      Pmf p(s2, {1.0 - p1, p1});
      CHECK(evaluate(sb, p) == evaluate(thresholded, p));
    }
  }
}

TEST_CASE("convexity probe accepts convex level sets and refutes binary variance") {
  // Token-valued (mode) and singleton (full distribution) level sets pair up
  // reliably; the real-valued mean exercises the bisection fallback.
  CHECK(level_set_convexity_check(make_mode(make_numeric_space(3)), 200, 5).convex);
  CHECK(level_set_convexity_check(make_full_distribution(make_numeric_space(3)), 200, 5)
            .convex);
  ConvexityReport mean_ok = level_set_convexity_check(make_mean(make_numeric_space(3)), 50, 1);
  CHECK(mean_ok.convex);
  CHECK(mean_ok.trials == 50);

  ConvexityReport bad = level_set_convexity_check(make_variance(make_numeric_space(2)), 200, 5);
  CHECK_FALSE(bad.convex);
  REQUIRE(bad.witness.has_value());
  // The witness mixture really does leave the level set.
  const ConvexityWitness& w = *bad.witness;
  Property var = make_variance(make_numeric_space(2));
  CHECK(evaluate(var, w.p).real() == doctest::Approx(evaluate(var, w.q).real()).epsilon(1e-6));
  CHECK(std::abs(w.value_at_mixture.real() - w.value_at_p.real()) > 1e-9);

  // Tail level values can defeat the pair search; the budget error reports it.
  CHECK(thrown_code([] {
          level_set_convexity_check(make_variance(make_numeric_space(2)), 200, 1);
        }) == ErrorCode::kRejectionBudgetExceeded);
}

TEST_CASE("value distance dispatches on metric and kind") {
  SpacePtr s2 = make_numeric_space(2);
  CHECK(value_distance(ValueMetric::kAbsDiff, PropertyValue(1.25), PropertyValue(1.5)) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(value_distance(ValueMetric::kDiscrete, tok("a"), tok("a")) == 0.0);
  CHECK(value_distance(ValueMetric::kDiscrete, tok("a"), tok("b")) == 1.0);
  PropertyValue r1{std::vector<std::string>{"a", "b"}};
  PropertyValue r2{std::vector<std::string>{"b", "a"}};
  CHECK(value_distance(ValueMetric::kDiscrete, r1, r2) == 1.0);
  CHECK(value_distance(ValueMetric::kDiscrete, r1, r1) == 0.0);
  CHECK(value_distance(ValueMetric::kTotalVariation, PropertyValue(Pmf(s2, {0.3, 0.7})),
                       PropertyValue(Pmf(s2, {0.5, 0.5}))) ==
        doctest::Approx(0.2).epsilon(1e-15));

  CHECK(thrown_code([] {
          value_distance(ValueMetric::kAbsDiff, tok("a"), tok("b"));
        }) == ErrorCode::kKindMismatch);
  CHECK(thrown_code([] {
          value_distance(ValueMetric::kDiscrete, PropertyValue(1.0), PropertyValue(1.0));
        }) == ErrorCode::kKindMismatch);
  CHECK(thrown_code([] {
          value_distance(ValueMetric::kAbsDiff, PropertyValue(1.0), tok("b"));
        }) == ErrorCode::kKindMismatch);
}

}  // TEST_SUITE
