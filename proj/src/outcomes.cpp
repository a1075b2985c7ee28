// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/outcomes.hpp"

#include <cmath>
#include <set>

#include "calibatlas/error.hpp"

namespace calibatlas {

namespace {
constexpr double kWeightTol = 1e-12;  // per-weight range slack
constexpr double kSumTol = 1e-9;      // normalization drift tolerated then fixed
}  // namespace

OutcomeSpace::OutcomeSpace(std::vector<std::string> labels,
                           std::optional<std::vector<double>> embedding)
    : labels_(std::move(labels)), embedding_(std::move(embedding)) {
  if (labels_.size() < 2) {
    fail(ErrorCode::kBadParam, "outcome space needs at least 2 labels, got " +
                                   std::to_string(labels_.size()));
  }
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    if (label.empty()) fail(ErrorCode::kBadParam, "empty outcome label");
    if (!seen.insert(label).second) {
      fail(ErrorCode::kBadParam, "duplicate outcome label '" + label + "'");
    }
  }
  if (embedding_ && embedding_->size() != labels_.size()) {
    fail(ErrorCode::kLengthMismatch,
         "embedding size " + std::to_string(embedding_->size()) +
             " != label count " + std::to_string(labels_.size()));
  }
}

const std::vector<double>& OutcomeSpace::embedding() const {
  if (!embedding_) fail(ErrorCode::kMissingEmbedding, "outcome space has no numeric embedding");
  return *embedding_;
}

double OutcomeSpace::value_of(std::size_t index) const {
  const auto& e = embedding();
  if (index >= e.size()) fail(ErrorCode::kBadParam, "outcome index out of range");
  return e[index];
}

std::size_t OutcomeSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  fail(ErrorCode::kBadParam, "unknown outcome label '" + label + "'");
}

bool OutcomeSpace::contains(const std::string& label) const {
  for (const auto& l : labels_) {
    if (l == label) return true;
  }
  return false;
}

SpacePtr make_space(std::vector<std::string> labels,
                    std::optional<std::vector<double>> embedding) {
  return std::make_shared<const OutcomeSpace>(std::move(labels), std::move(embedding));
}

SpacePtr make_numeric_space(std::size_t k) {
  std::vector<std::string> labels;
  std::vector<double> embedding;
  labels.reserve(k);
  embedding.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    labels.push_back(std::to_string(i));
    embedding.push_back(static_cast<double>(i));
  }
  return make_space(std::move(labels), std::move(embedding));
}

Pmf::Pmf(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) fail(ErrorCode::kBadParam, "pmf requires an outcome space");
  if (weights_.size() != space_->size()) {
    fail(ErrorCode::kLengthMismatch,
         "pmf has " + std::to_string(weights_.size()) + " weights for " +
             std::to_string(space_->size()) + " outcomes");
  }
  double sum = 0.0;
  for (auto& w : weights_) {
    if (w < -kWeightTol) {
      fail(ErrorCode::kNegativeWeight, "pmf weight " + std::to_string(w) + " < 0");
    }
    if (w < 0.0) w = 0.0;
    if (w > 1.0 + kWeightTol) {
      fail(ErrorCode::kNotNormalized, "pmf weight " + std::to_string(w) + " > 1");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    fail(ErrorCode::kNotNormalized,
         "pmf weights sum to " + std::to_string(sum) + ", expected 1");
  }
  if (sum != 1.0) {
    for (auto& w : weights_) w /= sum;
  }
}

double Pmf::mean() const {
  const auto& e = space_->embedding();
  double m = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) m += weights_[i] * e[i];
  return m;
}

double Pmf::second_moment() const {
  const auto& e = space_->embedding();
  double m = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) m += weights_[i] * e[i] * e[i];
  return m;
}

bool Pmf::operator==(const Pmf& other) const {
  return *space_ == *other.space_ && weights_ == other.weights_;
}

double total_variation(const Pmf& p, const Pmf& q) {
  if (!(*p.space() == *q.space())) {
    fail(ErrorCode::kSpaceMismatch, "total variation across different outcome spaces");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

Pmf mixture(const std::vector<Pmf>& components, const std::vector<double>& weights) {
  if (components.empty()) fail(ErrorCode::kEmptyMap, "mixture of zero components");
  if (components.size() != weights.size()) {
    fail(ErrorCode::kLengthMismatch, "mixture: " + std::to_string(components.size()) +
                                         " components vs " +
                                         std::to_string(weights.size()) + " weights");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) fail(ErrorCode::kNegativeWeight, "mixture weight " + std::to_string(w));
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    fail(ErrorCode::kNotNormalized,
         "mixture weights sum to " + std::to_string(sum) + ", expected 1");
  }
  const SpacePtr& space = components.front().space();
  std::vector<double> acc(space->size(), 0.0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (!(*components[c].space() == *space)) {
      fail(ErrorCode::kSpaceMismatch, "mixture components on different spaces");
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += weights[c] * components[c][i];
    }
  }
  return Pmf(space, std::move(acc));
}

}  // namespace calibatlas
