// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_DATASET_HPP_
#define CALIBATLAS_DATASET_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calibatlas/outcomes.hpp"
#include "calibatlas/value.hpp"

namespace calibatlas {

// One observation: an input id, the realized outcome, named predictions of
// any value kind, named binary group flags, and a positive weight.
struct Record {
  std::string x_id;
  std::size_t y = 0;  // index into the outcome space
  std::map<std::string, PropertyValue> predictions;
  std::map<std::string, bool> groups;
  double weight = 1.0;
};

// How to match records when conditioning on a prediction. Real-valued
// predictions match exactly by default; an optional bin width w switches to
// half-open bins [k*w, (k+1)*w). Non-real values always match exactly.
struct ConditionSpec {
  std::string prediction;
  PropertyValue value;
  std::optional<double> bin_width;  // only meaningful for Real values
};

// A conditioned empirical distribution plus the share of dataset weight in
// the conditioning event.
struct ConditionedPmf {
  Pmf pmf;
  double event_weight;  // matched weight / total weight, in (0, 1]
};

// One distinct predicted value: the level, its weight share, and the indices
// of member records in first-appearance order.
struct Level {
  PropertyValue value;
  double weight_share = 0.0;
  std::vector<std::size_t> members;
};

class PredictionDataset {
 public:
  PredictionDataset(std::string id, SpacePtr space, std::vector<Record> records);

  const std::string& id() const { return id_; }
  const SpacePtr& space() const { return space_; }
  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  double total_weight() const { return total_weight_; }

  // Names of predictions/groups present (identical across records by
  // construction). Prediction kinds are consistent per name.
  const std::vector<std::string>& prediction_names() const { return prediction_names_; }
  const std::vector<std::string>& group_names() const { return group_names_; }
  // Throws MissingPrediction for unknown names.
  PropertyValue::Kind prediction_kind(const std::string& name) const;
  bool has_prediction(const std::string& name) const;

  // Empirical conditional distribution of Y given a matching event.
  // Throws EmptyEvent when nothing matches, MissingPrediction for bad names,
  // KindMismatch when the spec's value kind differs from the prediction's.
  ConditionedPmf condition(const ConditionSpec& spec) const;

  // Distinct values of a prediction in order of first appearance.
  std::vector<Level> levels(const std::string& prediction) const;

  // Pooled conditional for one Level (direct sum over its member records).
  ConditionedPmf condition_on_level(const Level& level) const;

  // Marginal outcome distribution (weights pooled over all records).
  Pmf marginal() const;

  // New dataset with an extra prediction column derived record-by-record.
  PredictionDataset with_derived_prediction(
      const std::string& new_name,
      const std::function<PropertyValue(const Record&)>& fn) const;

  // Records with group flag == value for the named group, weights kept raw.
  // Throws EmptyGroup when the restriction is empty, BadParam for bad names.
  PredictionDataset restrict_to_group(const std::string& group, bool value) const;

 private:
  std::string id_;
  SpacePtr space_;
  std::vector<Record> records_;
  std::vector<std::string> prediction_names_;
  std::vector<std::string> group_names_;
  double total_weight_ = 0.0;
};

}  // namespace calibatlas

#endif  // CALIBATLAS_DATASET_HPP_
