// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_VALUE_HPP_
#define CALIBATLAS_VALUE_HPP_

#include <string>
#include <variant>
#include <vector>

#include "calibatlas/outcomes.hpp"

namespace calibatlas {

// A property value / prediction value: a real number, a discrete token, a
// ranking (ordered label list), or a full distribution. Predictions stored in
// datasets use the same type, so "the property of a prediction" needs no
// conversions.
class PropertyValue {
 public:
  enum class Kind : int { kReal = 0, kToken = 1, kRanking = 2, kDistribution = 3 };

  PropertyValue() : v_(0.0) {}
  explicit PropertyValue(double real) : v_(real) {}
  explicit PropertyValue(std::string token) : v_(std::move(token)) {}
  explicit PropertyValue(std::vector<std::string> ranking) : v_(std::move(ranking)) {}
  explicit PropertyValue(Pmf dist) : v_(std::move(dist)) {}

  Kind kind() const { return static_cast<Kind>(v_.index()); }
  bool is_real() const { return kind() == Kind::kReal; }
  bool is_token() const { return kind() == Kind::kToken; }
  bool is_ranking() const { return kind() == Kind::kRanking; }
  bool is_distribution() const { return kind() == Kind::kDistribution; }

  // Accessors throw KindMismatch on the wrong alternative.
  double real() const;
  const std::string& token() const;
  const std::vector<std::string>& ranking() const;
  const Pmf& distribution() const;

  // Exact structural equality (reals compared with ==; distributions
  // componentwise on the same space).
  bool operator==(const PropertyValue& other) const;
  bool operator!=(const PropertyValue& other) const { return !(*this == other); }

  // Total order used for deterministic grouping and sorted output:
  // kind rank first, then the natural order within the kind.
  bool operator<(const PropertyValue& other) const;

  // Compact human/CSV rendering: reals via round-trip format, tokens as-is,
  // rankings "a>b>c", distributions "p0;p1;...".
  std::string to_string() const;

  static const char* kind_name(Kind kind);

 private:
  std::variant<double, std::string, std::vector<std::string>, Pmf> v_;
};

}  // namespace calibatlas

#endif  // CALIBATLAS_VALUE_HPP_
