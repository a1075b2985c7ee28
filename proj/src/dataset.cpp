// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/dataset.hpp"

#include <cmath>
#include <map>

#include "calibatlas/error.hpp"

namespace calibatlas {

namespace {

bool values_match(const PropertyValue& lhs, const PropertyValue& rhs,
                  const std::optional<double>& bin_width) {
  if (bin_width && lhs.is_real() && rhs.is_real()) {
    if (*bin_width <= 0.0) fail(ErrorCode::kBadParam, "bin width must be positive");
    // Half-open bins [k*w, (k+1)*w).
    return std::floor(lhs.real() / *bin_width) == std::floor(rhs.real() / *bin_width);
  }
  return lhs == rhs;
}

}  // namespace

PredictionDataset::PredictionDataset(std::string id, SpacePtr space,
                                     std::vector<Record> records)
    : id_(std::move(id)), space_(std::move(space)), records_(std::move(records)) {
  if (!space_) fail(ErrorCode::kBadParam, "dataset requires an outcome space");
  if (records_.empty()) fail(ErrorCode::kEmptyDataset, "dataset '" + id_ + "' has no records");

  const Record& first = records_.front();
  for (const auto& [name, value] : first.predictions) prediction_names_.push_back(name);
  for (const auto& [name, flag] : first.groups) group_names_.push_back(name);

  for (std::size_t r = 0; r < records_.size(); ++r) {
    const Record& rec = records_[r];
    if (rec.y >= space_->size()) {
      fail(ErrorCode::kBadParam, "record " + std::to_string(r) + " outcome index " +
                                     std::to_string(rec.y) + " out of range");
    }
    if (!(rec.weight > 0.0)) {
      fail(ErrorCode::kNegativeWeight, "record " + std::to_string(r) + " weight " +
                                           std::to_string(rec.weight) +
                                           " is not positive");
    }
    if (rec.predictions.size() != prediction_names_.size() ||
        rec.groups.size() != group_names_.size()) {
      fail(ErrorCode::kLengthMismatch,
           "record " + std::to_string(r) + " prediction/group names differ from record 0");
    }
    for (const auto& [name, value] : rec.predictions) {
      auto it = first.predictions.find(name);
      if (it == first.predictions.end()) {
        fail(ErrorCode::kLengthMismatch,
             "record " + std::to_string(r) + " has unexpected prediction '" + name + "'");
      }
      if (value.kind() != it->second.kind()) {
        fail(ErrorCode::kKindMismatch, "prediction '" + name + "' changes kind at record " +
                                           std::to_string(r));
      }
      if (value.is_distribution() && !(*value.distribution().space() == *space_)) {
        fail(ErrorCode::kSpaceMismatch,
             "prediction '" + name + "' at record " + std::to_string(r) +
                 " is a distribution over a different outcome space");
      }
    }
    total_weight_ += rec.weight;
  }
}

bool PredictionDataset::has_prediction(const std::string& name) const {
  return records_.front().predictions.count(name) > 0;
}

PropertyValue::Kind PredictionDataset::prediction_kind(const std::string& name) const {
  auto it = records_.front().predictions.find(name);
  if (it == records_.front().predictions.end()) {
    fail(ErrorCode::kMissingPrediction, "dataset has no prediction named '" + name + "'");
  }
  return it->second.kind();
}

ConditionedPmf PredictionDataset::condition(const ConditionSpec& spec) const {
  PropertyValue::Kind kind = prediction_kind(spec.prediction);
  if (kind != spec.value.kind()) {
    fail(ErrorCode::kKindMismatch,
         std::string("condition value kind ") + PropertyValue::kind_name(spec.value.kind()) +
             " does not match prediction '" + spec.prediction + "' of kind " +
             PropertyValue::kind_name(kind));
  }
  std::vector<double> acc(space_->size(), 0.0);
  double matched = 0.0;
  for (const Record& rec : records_) {
    const PropertyValue& v = rec.predictions.at(spec.prediction);
    if (values_match(v, spec.value, spec.bin_width)) {
      acc[rec.y] += rec.weight;
      matched += rec.weight;
    }
  }
  if (matched <= 0.0) {
    fail(ErrorCode::kEmptyEvent,
         "no record matches " + spec.prediction + " = " + spec.value.to_string());
  }
  for (auto& w : acc) w /= matched;
  return ConditionedPmf{Pmf(space_, std::move(acc)), matched / total_weight_};
}

std::vector<Level> PredictionDataset::levels(const std::string& prediction) const {
  if (!has_prediction(prediction)) {
    fail(ErrorCode::kMissingPrediction, "dataset has no prediction named '" + prediction + "'");
  }
  std::vector<Level> out;
  std::map<PropertyValue, std::size_t> index;
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const PropertyValue& v = records_[r].predictions.at(prediction);
    auto [it, inserted] = index.try_emplace(v, out.size());
    if (inserted) out.push_back(Level{v, 0.0, {}});
    Level& level = out[it->second];
    level.weight_share += records_[r].weight / total_weight_;
    level.members.push_back(r);
  }
  return out;
}

ConditionedPmf PredictionDataset::condition_on_level(const Level& level) const {
  std::vector<double> acc(space_->size(), 0.0);
  double matched = 0.0;
  for (std::size_t r : level.members) {
    acc[records_[r].y] += records_[r].weight;
    matched += records_[r].weight;
  }
  if (matched <= 0.0) fail(ErrorCode::kEmptyEvent, "level has no weight");
  for (auto& w : acc) w /= matched;
  return ConditionedPmf{Pmf(space_, std::move(acc)), matched / total_weight_};
}

Pmf PredictionDataset::marginal() const {
  std::vector<double> acc(space_->size(), 0.0);
  for (const Record& rec : records_) acc[rec.y] += rec.weight;
  for (auto& w : acc) w /= total_weight_;
  return Pmf(space_, std::move(acc));
}

PredictionDataset PredictionDataset::with_derived_prediction(
    const std::string& new_name,
    const std::function<PropertyValue(const Record&)>& fn) const {
  if (has_prediction(new_name)) {
    fail(ErrorCode::kBadParam, "prediction '" + new_name + "' already exists");
  }
  std::vector<Record> out = records_;
  for (Record& rec : out) rec.predictions.emplace(new_name, fn(rec));
  return PredictionDataset(id_, space_, std::move(out));
}

PredictionDataset PredictionDataset::restrict_to_group(const std::string& group,
                                                       bool value) const {
  if (records_.front().groups.find(group) == records_.front().groups.end()) {
    fail(ErrorCode::kBadParam, "dataset has no group named '" + group + "'");
  }
  std::vector<Record> out;
  for (const Record& rec : records_) {
    if (rec.groups.at(group) == value) out.push_back(rec);
  }
  if (out.empty()) {
    fail(ErrorCode::kEmptyGroup,
         "group " + group + "=" + (value ? "1" : "0") + " matches no record");
  }
  return PredictionDataset(id_ + "[" + group + "=" + (value ? "1" : "0") + "]", space_,
                           std::move(out));
}

}  // namespace calibatlas
