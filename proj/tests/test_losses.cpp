// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>
#include <vector>

#include "calibatlas/losses.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace calibatlas;
using testutil::thrown_code;

namespace {

PropertyValue tok(const char* t) { return PropertyValue(std::string(t)); }

std::vector<PropertyValue> real_grid(const std::vector<double>& vs) {
  std::vector<PropertyValue> out;
  for (double v : vs) out.push_back(PropertyValue(v));
  return out;
}

std::vector<PropertyValue> token_grid(const SpacePtr& s) {
  std::vector<PropertyValue> out;
  for (const auto& l : s->labels()) out.push_back(PropertyValue(l));
  return out;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("expected loss sums the catalog penalties") {
  SpacePtr s2 = make_numeric_space(2);
  SpacePtr s3 = make_numeric_space(3);
  Pmf p(s2, {0.25, 0.75});

  CHECK(expected_loss(make_squared_loss(s2), p, PropertyValue(0.5)) ==
        doctest::Approx(0.25).epsilon(1e-15));
  // Pinball: (1 - tau) max(gamma - y, 0) + tau max(y - gamma, 0).
  LossFn pin = make_pinball_loss(s3, 0.25);
  Pmf u(s3, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(expected_loss(pin, u, PropertyValue(1.0)) ==
        doctest::Approx((0.75 * 1.0 + 0.25 * 1.0) / 3).epsilon(1e-12));
  LossFn z1 = make_zero_one_loss(s2);
  CHECK(expected_loss(z1, p, tok("1")) == doctest::Approx(0.25).epsilon(1e-15));

  CHECK(thrown_code([&] { expected_loss(make_squared_loss(s2), p, tok("1")); }) ==
        ErrorCode::kKindMismatch);
  CHECK(thrown_code([&] { expected_loss(z1, p, PropertyValue(1.0)); }) ==
        ErrorCode::kKindMismatch);
}

TEST_CASE("simple loss penalizes the two mistakes with q and 1-q") {
  SpacePtr s2 = make_numeric_space(2);
  SimpleLossPair pair = make_simple_loss(s2, 0.3);
  Pmf p(s2, {0.6, 0.4});
  CHECK(expected_loss(pair.loss, p, tok("a")) == doctest::Approx(0.18).epsilon(1e-15));
  CHECK(expected_loss(pair.loss, p, tok("b")) == doctest::Approx(0.28).epsilon(1e-15));
  CHECK(pair.grid.size() == 2);
  CHECK(evaluate(pair.property, p) == tok("a"));  // 0.4 > 0.3
}

TEST_CASE("best response keeps the earliest tied grid entry") {
  SpacePtr s2 = make_numeric_space(2);
  LossFn z1 = make_zero_one_loss(s2);
  Pmf even(s2, {0.5, 0.5});
  BestResponse br = best_response(z1, even, token_grid(s2));
  CHECK(br.index == 0);
  CHECK(br.value == tok("0"));
  CHECK(br.expected == doctest::Approx(0.5).epsilon(1e-15));

  BestResponse sq = best_response(make_squared_loss(s2), Pmf(s2, {0.25, 0.75}),
                                  real_grid({0.0, 0.5, 0.75, 1.0}));
  CHECK(sq.value == PropertyValue(0.75));

  CHECK(thrown_code([&] { best_response(z1, even, {}); }) == ErrorCode::kEmptyGrid);
}

TEST_CASE("expected identification is positive exactly on overshoot") {
  SpacePtr s2 = make_numeric_space(2);
  IdentificationFn v = make_mean_identification(s2);
  Pmf p(s2, {0.25, 0.75});
  CHECK(expected_identification(v, p, 0.9) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(expected_identification(v, p, 0.75) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(expected_identification(v, p, 0.5) < 0.0);
}

TEST_CASE("loss from the mean identification matches the closed form") {
  SpacePtr s3 = make_numeric_space(3);
  IdentificationFn v = make_mean_identification(s3);
  LossFn induced = loss_from_identification(v, 0.0, {}, 16);
  for (std::size_t y = 0; y < 3; ++y) {
    for (double gamma : {0.0, 0.4, 1.0, 1.7, 2.0}) {
      double want = gamma * gamma / 2 - static_cast<double>(y) * gamma;
      Pmf point(s3, {y == 0 ? 1.0 : 0.0, y == 1 ? 1.0 : 0.0, y == 2 ? 1.0 : 0.0});
      CHECK(expected_loss(induced, point, PropertyValue(gamma)) ==
            doctest::Approx(want).epsilon(1e-12));
    }
  }

  // The trapezoid fallback is exact for V affine in gamma.
  IdentificationFn flat;
  flat.name = "mean_no_integral";
  flat.space = s3;
  flat.eval = [s3](std::size_t y, double gamma) { return gamma - s3->value_of(y); };
  flat.lipschitz_m = 1.0;
  LossFn quad = loss_from_identification(flat, 0.0, {}, 4);
  Pmf point(s3, {0.0, 1.0, 0.0});
  CHECK(expected_loss(quad, point, PropertyValue(1.7)) ==
        doctest::Approx(1.7 * 1.7 / 2 - 1.7).epsilon(1e-12));
  // Quadrature error metadata: M / (12 n^2).
  CHECK(quad.quad_error_coeff == doctest::Approx(1.0 / 192).epsilon(1e-15));

  // Per-outcome offsets shift the loss pointwise.
  LossFn shifted = loss_from_identification(v, 0.0, {1.0, 2.0, 3.0}, 4);
  CHECK(expected_loss(shifted, point, PropertyValue(0.0)) ==
        doctest::Approx(2.0).epsilon(1e-12));

  IdentificationFn anti = flat;
  anti.oriented = false;
  CHECK(thrown_code([&] { loss_from_identification(anti, 0.0, {}, 4); }) ==
        ErrorCode::kNotOriented);
  CHECK(thrown_code([&] { loss_from_identification(v, 0.0, {1.0}, 4); }) ==
        ErrorCode::kLengthMismatch);
}

TEST_CASE("grid bound is the sup of summed absolute penalties") {
  SpacePtr s2 = make_numeric_space(2);
  LossFn sq = make_squared_loss(s2);
  CHECK(loss_bound_over_grid(sq, real_grid({0.0, 0.5, 1.0})) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(loss_bound_over_grid(sq, real_grid({2.0})) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(thrown_code([&] { loss_bound_over_grid(sq, {}); }) == ErrorCode::kEmptyGrid);
}

TEST_CASE("consistency check links catalog losses to their properties") {
  SpacePtr s3 = make_numeric_space(3);
  std::vector<PropertyValue> grid = real_grid({0.0, 1.0, 2.0});

  ConsistencyReport quant =
      check_consistency(make_pinball_loss(s3, 0.5), make_quantile(s3, 0.5), 100, 3, grid);
  CHECK(quant.consistent);
  CHECK(quant.trials == 100);

  ConsistencyReport mode =
      check_consistency(make_zero_one_loss(s3), make_mode(s3), 100, 3, token_grid(s3));
  CHECK(mode.consistent);

  // The pinball loss does not elicit the mean: a witness distribution
  // separates its best response from the mean.
  ConsistencyReport wrong =
      check_consistency(make_pinball_loss(s3, 0.3), make_mean(s3), 200, 3, grid);
  CHECK_FALSE(wrong.consistent);
  REQUIRE(wrong.witness.has_value());
  CHECK(wrong.witness->gap > 1e-6);
}

TEST_CASE("bayes pair of the squared loss recovers mean and variance") {
  SpacePtr s2 = make_numeric_space(2);
  std::vector<double> dense;
  for (int i = 0; i <= 100; ++i) dense.push_back(i / 100.0);
  BayesPair bp = make_bayes_pair(make_squared_loss(s2), real_grid(dense), "sq_bayes");
  Pmf p(s2, {0.25, 0.75});
  CHECK(evaluate(bp.phi, p).real() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(evaluate(bp.theta, p).real() == doctest::Approx(0.1875).epsilon(1e-12));
}

TEST_CASE("regularity estimates bracket the declared constants") {
  SpacePtr s2 = make_numeric_space(2);
  std::vector<double> gammas;
  for (int i = 1; i < 20; ++i) gammas.push_back(i / 20.0);

  RegularityEstimate mean_est = estimate_identification_regularity(
      make_mean_identification(s2), make_mean(s2), 200, 11, gammas);
  CHECK(mean_est.oriented_ok);
  CHECK(mean_est.samples > 0);
  CHECK(mean_est.n_hat == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mean_est.m_hat == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> g = {0.0, 1.0};
  std::vector<double> h = {0.5, 2.0};
  RegularityEstimate ratio_est = estimate_identification_regularity(
      make_ratio_identification(s2, g, h), make_ratio_of_expectations(s2, g, h), 200, 11,
      gammas);
  CHECK(ratio_est.oriented_ok);
  CHECK(ratio_est.n_hat >= 0.5 - 1e-9);
  CHECK(ratio_est.m_hat <= 2.0 + 1e-9);
  CHECK(ratio_est.n_hat <= ratio_est.m_hat);
}

}  // TEST_SUITE
