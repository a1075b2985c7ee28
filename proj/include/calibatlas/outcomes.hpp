// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_OUTCOMES_HPP_
#define CALIBATLAS_OUTCOMES_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace calibatlas {

// Finite outcome space: an ordered list of distinct labels, optionally paired
// with a numeric embedding (one real per label) used by scalar properties and
// losses that need outcome values rather than labels.
class OutcomeSpace {
 public:
  // Throws BadParam (fewer than 2 labels, duplicate or empty label) or
  // LengthMismatch (embedding size != label count).
  OutcomeSpace(std::vector<std::string> labels,
               std::optional<std::vector<double>> embedding = std::nullopt);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool has_embedding() const { return embedding_.has_value(); }
  // Throws MissingEmbedding when no embedding was provided.
  const std::vector<double>& embedding() const;
  double value_of(std::size_t index) const;
  // Index of a label; throws BadParam for unknown labels.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const;

  bool operator==(const OutcomeSpace& other) const {
    return labels_ == other.labels_ && embedding_ == other.embedding_;
  }

 private:
  std::vector<std::string> labels_;
  std::optional<std::vector<double>> embedding_;
};

using SpacePtr = std::shared_ptr<const OutcomeSpace>;

SpacePtr make_space(std::vector<std::string> labels,
                    std::optional<std::vector<double>> embedding = std::nullopt);

// Convenience: labels "0".."k-1" with embedding {0, ..., k-1}.
SpacePtr make_numeric_space(std::size_t k);

// Probability mass function over an OutcomeSpace. Weights are validated on
// construction: each in [0, 1] within 1e-12 (clamped), the sum within 1e-9 of
// 1 (silently renormalized, which keeps exact inputs exact).
class Pmf {
 public:
  // Throws LengthMismatch, NegativeWeight, or NotNormalized.
  Pmf(SpacePtr space, std::vector<double> weights);

  const SpacePtr& space() const { return space_; }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::size_t size() const { return weights_.size(); }

  double mean() const;           // requires embedding
  double second_moment() const;  // requires embedding

  // Exact componentwise equality on the same space (space compared by value).
  bool operator==(const Pmf& other) const;
  bool operator!=(const Pmf& other) const { return !(*this == other); }

 private:
  SpacePtr space_;
  std::vector<double> weights_;
};

// Total variation distance: (1/2) * sum_y |p_y - q_y|.
// Throws SpaceMismatch when the spaces differ.
double total_variation(const Pmf& p, const Pmf& q);

// Convex combination of pmfs on a shared space. Weights must be nonnegative
// and sum to 1 within 1e-9. Throws LengthMismatch / SpaceMismatch /
// NegativeWeight / NotNormalized / EmptyMap (no components).
Pmf mixture(const std::vector<Pmf>& components, const std::vector<double>& weights);

}  // namespace calibatlas

#endif  // CALIBATLAS_OUTCOMES_HPP_
