// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/value.hpp"

#include <cstdio>

#include "calibatlas/error.hpp"

namespace calibatlas {

namespace {
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

const char* PropertyValue::kind_name(Kind kind) {
  switch (kind) {
    case Kind::kReal: return "real";
    case Kind::kToken: return "token";
    case Kind::kRanking: return "ranking";
    case Kind::kDistribution: return "distribution";
  }
  return "unknown";
}

double PropertyValue::real() const {
  if (!is_real()) {
    fail(ErrorCode::kKindMismatch,
         std::string("expected real value, got ") + kind_name(kind()));
  }
  return std::get<double>(v_);
}

const std::string& PropertyValue::token() const {
  if (!is_token()) {
    fail(ErrorCode::kKindMismatch,
         std::string("expected token value, got ") + kind_name(kind()));
  }
  return std::get<std::string>(v_);
}

const std::vector<std::string>& PropertyValue::ranking() const {
  if (!is_ranking()) {
    fail(ErrorCode::kKindMismatch,
         std::string("expected ranking value, got ") + kind_name(kind()));
  }
  return std::get<std::vector<std::string>>(v_);
}

const Pmf& PropertyValue::distribution() const {
  if (!is_distribution()) {
    fail(ErrorCode::kKindMismatch,
         std::string("expected distribution value, got ") + kind_name(kind()));
  }
  return std::get<Pmf>(v_);
}

bool PropertyValue::operator==(const PropertyValue& other) const {
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::kReal: return std::get<double>(v_) == std::get<double>(other.v_);
    case Kind::kToken: return std::get<std::string>(v_) == std::get<std::string>(other.v_);
    case Kind::kRanking:
      return std::get<std::vector<std::string>>(v_) ==
             std::get<std::vector<std::string>>(other.v_);
    case Kind::kDistribution: return std::get<Pmf>(v_) == std::get<Pmf>(other.v_);
  }
  return false;
}

bool PropertyValue::operator<(const PropertyValue& other) const {
  if (kind() != other.kind()) {
    return static_cast<int>(kind()) < static_cast<int>(other.kind());
  }
  switch (kind()) {
    case Kind::kReal: return std::get<double>(v_) < std::get<double>(other.v_);
    case Kind::kToken: return std::get<std::string>(v_) < std::get<std::string>(other.v_);
    case Kind::kRanking:
      return std::get<std::vector<std::string>>(v_) <
             std::get<std::vector<std::string>>(other.v_);
    case Kind::kDistribution:
      return std::get<Pmf>(v_).weights() < std::get<Pmf>(other.v_).weights();
  }
  return false;
}

std::string PropertyValue::to_string() const {
  switch (kind()) {
    case Kind::kReal: return format_double(std::get<double>(v_));
    case Kind::kToken: return std::get<std::string>(v_);
    case Kind::kRanking: {
      std::string out;
      for (const auto& label : std::get<std::vector<std::string>>(v_)) {
        if (!out.empty()) out += ">";
        out += label;
      }
      return out;
    }
    case Kind::kDistribution: {
      std::string out;
      for (double w : std::get<Pmf>(v_).weights()) {
        if (!out.empty()) out += ";";
        out += format_double(w);
      }
      return out;
    }
  }
  return "";
}

}  // namespace calibatlas
