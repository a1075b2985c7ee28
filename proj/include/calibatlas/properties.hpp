// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_PROPERTIES_HPP_
#define CALIBATLAS_PROPERTIES_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calibatlas/outcomes.hpp"
#include "calibatlas/value.hpp"

namespace calibatlas {

// Metric on property values. abs_diff compares reals, discrete compares
// tokens/rankings (0 or 1), total_variation compares distributions.
enum class ValueMetric : int { kAbsDiff = 0, kDiscrete = 1, kTotalVariation = 2 };

const char* value_metric_name(ValueMetric metric);

// Distance between two values under a metric. Throws KindMismatch when a
// value kind is incompatible with the metric or the kinds differ.
double value_distance(ValueMetric metric, const PropertyValue& a, const PropertyValue& b);

// A property of distributions: a deterministic map Pmf -> PropertyValue, the
// metric its values are compared under, and optional declared metadata used
// by the implication harness (a finite value grid, a total-variation
// Lipschitz constant, and whether level sets are convex).
struct Property {
  std::string name;
  SpacePtr space;
  std::function<PropertyValue(const Pmf&)> evaluator;
  ValueMetric value_metric = ValueMetric::kAbsDiff;
  std::optional<std::vector<PropertyValue>> value_grid;
  std::optional<double> lipschitz_k;        // |Gamma(p)-Gamma(q)| <= K * TV(p, q)
  std::optional<bool> convex_level_sets;    // declared, not inferred
};

// Evaluates the property; throws SpaceMismatch when p lives on another space.
PropertyValue evaluate(const Property& prop, const Pmf& p);

// --- catalog ---------------------------------------------------------------
// Scalar-valued entries require a numeric embedding on the space.

Property make_mean(const SpacePtr& space);
// Smallest embedding value v with P(Y <= v) >= tau; tau in (0, 1).
Property make_quantile(const SpacePtr& space, double tau);
// Most probable label; ties resolved toward the earlier label.
Property make_mode(const SpacePtr& space);
// Labels ordered by decreasing probability; ties keep label order.
Property make_ranking(const SpacePtr& space);
Property make_variance(const SpacePtr& space);
// quantile_tau(p) + E[max(0, Y - quantile_tau(p))] / (1 - tau).
Property make_cvar(const SpacePtr& space, double tau);
// E[g(Y)] / E[h(Y)] for per-outcome values g, h with h > 0 everywhere.
Property make_ratio_of_expectations(const SpacePtr& space, std::vector<double> g,
                                    std::vector<double> h);
// Binary spaces only: "a" when P(Y = 1) > q, else "b" (boundary maps to "b").
Property make_simple_binary(const SpacePtr& space, double q);
// Identity Pmf -> Distribution under total variation.
Property make_full_distribution(const SpacePtr& space);

// Parameters for the token-addressable catalog factory.
struct PropertyParams {
  std::optional<double> tau;             // quantile, cvar
  std::optional<double> q;               // simple_binary
  std::optional<std::vector<double>> g;  // ratio_of_expectations
  std::optional<std::vector<double>> h;
};

// Factory over kind tokens: mean, quantile, mode, ranking, variance, cvar,
// ratio_of_expectations, simple_binary, full_distribution. Throws BadParam
// for unknown kinds or missing/invalid parameters.
Property make_standard_property(const SpacePtr& space, const std::string& kind,
                                const PropertyParams& params = {});

// Post-composition phi o Gamma. The grid, when present on the base property,
// is mapped through phi and deduplicated in stable order. phi_lipschitz (for
// real->real phi under abs_diff metrics) propagates a Lipschitz constant.
Property refine(const Property& base, const std::string& name,
                const std::function<PropertyValue(const PropertyValue&)>& phi,
                ValueMetric new_metric,
                std::optional<double> phi_lipschitz = std::nullopt);

// --- level-set convexity probe ----------------------------------------------

struct ConvexityWitness {
  Pmf p;
  Pmf q;
  double lambda;
  PropertyValue value_at_p;
  PropertyValue value_at_mixture;
};

struct ConvexityReport {
  bool convex = true;
  std::size_t trials = 0;
  std::optional<ConvexityWitness> witness;
};

// Samples pairs p, q with Gamma(p) = Gamma(q) from a seeded simplex sampler
// and tests Gamma at a random mixture point. Pair search uses rejection; for
// Real-valued properties that fail rejection it refines by bisecting along a
// segment between fresh samples (exact for continuous properties), and for
// Distribution-valued properties it falls back to q = p since level sets are
// singletons. Throws RejectionBudgetExceeded when no pair can be found.
ConvexityReport level_set_convexity_check(const Property& prop, std::size_t n_trials,
                                          std::uint64_t seed);

}  // namespace calibatlas

#endif  // CALIBATLAS_PROPERTIES_HPP_
