// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/ingest.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "calibatlas/error.hpp"
#include "calibatlas/log.hpp"
#include "jsonout.hpp"

namespace calibatlas {
namespace {

using nlohmann::json;

constexpr double kRenormalizeDrift = 1e-6;   // beyond this a row is invalid
constexpr double kSilentDrift = 1e-12;       // below this the row is kept verbatim

[[noreturn]] void row_fail(std::size_t line, const std::string& msg) {
  fail(ErrorCode::kRowError, "line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_real_field(const std::string& s, std::size_t line, const std::string& what) {
  if (s.empty()) row_fail(line, what + " is empty");
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size()) row_fail(line, what + " '" + s + "' is not a number");
  return v;
}

double checked_weight(double w, std::size_t line) {
  if (std::isnan(w) || w < 0) row_fail(line, "negative weight " + format_real(w));
  if (!(w > 0) || !std::isfinite(w)) row_fail(line, "weight must be positive and finite");
  return w;
}

std::size_t checked_label(const SpacePtr& space, const std::string& label, std::size_t line) {
  if (!space->contains(label)) row_fail(line, "unknown outcome label '" + label + "'");
  return space->index_of(label);
}

// Validates a raw pmf row; renormalizes small drift (recorded in *warnings),
// rejects drift beyond kRenormalizeDrift.
Pmf checked_pmf(const SpacePtr& space, std::vector<double> w, const std::string& pred,
                std::size_t line, std::vector<std::string>* warnings) {
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x)) row_fail(line, "prediction '" + pred + "' has a non-finite entry");
    if (x < -kSilentDrift)
      row_fail(line, "prediction '" + pred + "' has negative entry " + format_real(x));
    sum += x;
  }
  double drift = std::abs(sum - 1.0);
  if (drift > kRenormalizeDrift)
    row_fail(line, "prediction '" + pred + "' sums to " + format_real(sum) +
                       " (drift beyond 1e-06)");
  if (drift > kSilentDrift) {
    for (double& x : w) x /= sum;
    std::string msg = "line " + std::to_string(line) + ": prediction '" + pred +
                      "' renormalized (sum " + format_real(sum) + ")";
    warnings->push_back(msg);
    log_warn(msg);
  }
  try {
    return Pmf(space, std::move(w));
  } catch (const Error& e) {
    row_fail(line, std::string(e.what()));
  }
}

bool checked_flag_token(const std::string& s, const std::string& group, std::size_t line) {
  if (s == "0") return false;
  if (s == "1") return true;
  row_fail(line, "group '" + group + "' must be 0 or 1, got '" + s + "'");
}

// --- CSV ----------------------------------------------------------------------

IngestResult ingest_csv(const AuditConfig& config, const SpacePtr& space,
                        const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  // Header.
  std::map<std::string, std::size_t> column;
  std::size_t n_columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> names = split_csv(line);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].empty()) fail(ErrorCode::kSchemaError, "empty header column name");
      if (!column.emplace(names[i], i).second)
        fail(ErrorCode::kSchemaError, "duplicate column '" + names[i] + "'");
    }
    n_columns = names.size();
    break;
  }
  if (column.empty()) fail(ErrorCode::kSchemaError, "input has no header row");

  auto need = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) fail(ErrorCode::kSchemaError, "missing column '" + name + "'");
    return it->second;
  };

  std::size_t col_x = need("x_id");
  std::size_t col_y = need("y");
  std::optional<std::size_t> col_w;
  if (column.count("weight")) col_w = column.at("weight");

  struct PredPlan {
    const PredictionSpec* spec;
    std::vector<std::size_t> cols;
  };
  std::vector<PredPlan> preds;
  for (const PredictionSpec& spec : config.predictions) {
    PredPlan plan{&spec, {}};
    if (spec.kind == "dist") {
      if (spec.columns.empty()) {
        for (const std::string& label : config.labels) plan.cols.push_back(need("p_" + label));
      } else {
        for (const std::string& c : spec.columns) plan.cols.push_back(need(c));
      }
    } else {
      plan.cols.push_back(need(spec.columns.empty() ? spec.name : spec.columns[0]));
    }
    preds.push_back(std::move(plan));
  }
  std::vector<std::pair<std::string, std::size_t>> group_cols;
  for (const std::string& g : config.groups) group_cols.emplace_back(g, need("g_" + g));

  std::vector<std::string> warnings;
  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_csv(line);
    if (f.size() != n_columns)
      row_fail(line_no, "expected " + std::to_string(n_columns) + " fields, got " +
                            std::to_string(f.size()));
    Record rec;
    rec.x_id = f[col_x];
    rec.y = checked_label(space, f[col_y], line_no);
    rec.weight =
        col_w ? checked_weight(parse_real_field(f[*col_w], line_no, "weight"), line_no) : 1.0;
    for (const PredPlan& plan : preds) {
      const std::string& name = plan.spec->name;
      if (plan.spec->kind == "dist") {
        std::vector<double> w;
        w.reserve(plan.cols.size());
        for (std::size_t c : plan.cols)
          w.push_back(parse_real_field(f[c], line_no, "prediction '" + name + "'"));
        rec.predictions.emplace(
            name, PropertyValue(checked_pmf(space, std::move(w), name, line_no, &warnings)));
      } else if (plan.spec->kind == "real") {
        rec.predictions.emplace(name, PropertyValue(parse_real_field(
                                          f[plan.cols[0]], line_no, "prediction '" + name + "'")));
      } else {
        const std::string& tok = f[plan.cols[0]];
        if (tok.empty()) row_fail(line_no, "prediction '" + name + "' is empty");
        rec.predictions.emplace(name, PropertyValue(tok));
      }
    }
    for (const auto& [g, c] : group_cols) rec.groups[g] = checked_flag_token(f[c], g, line_no);
    records.push_back(std::move(rec));
  }
  return IngestResult{PredictionDataset(config.input_path, space, std::move(records)),
                      std::move(warnings)};
}

// --- JSONL --------------------------------------------------------------------

double json_real(const json& v, std::size_t line, const std::string& what) {
  if (!v.is_number()) row_fail(line, what + " must be a number");
  return v.get<double>();
}

IngestResult ingest_jsonl(const AuditConfig& config, const SpacePtr& space,
                          const std::string& text) {
  std::vector<std::string> warnings;
  std::vector<Record> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      row_fail(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!row.is_object()) row_fail(line_no, "record must be an object");
    Record rec;
    if (!row.contains("x_id") || !row["x_id"].is_string())
      row_fail(line_no, "missing string key 'x_id'");
    rec.x_id = row["x_id"].get<std::string>();
    if (!row.contains("y") || !row["y"].is_string())
      row_fail(line_no, "missing string key 'y'");
    rec.y = checked_label(space, row["y"].get<std::string>(), line_no);
    if (row.contains("weight"))
      rec.weight = checked_weight(json_real(row["weight"], line_no, "weight"), line_no);

    const json* pred = nullptr;
    if (!config.predictions.empty()) {
      if (!row.contains("pred") || !row["pred"].is_object())
        row_fail(line_no, "missing object key 'pred'");
      pred = &row["pred"];
    }
    for (const PredictionSpec& spec : config.predictions) {
      if (!pred->contains(spec.name))
        row_fail(line_no, "missing prediction '" + spec.name + "'");
      const json& v = (*pred)[spec.name];
      if (spec.kind == "dist") {
        if (!v.is_array() || v.size() != config.labels.size())
          row_fail(line_no, "prediction '" + spec.name + "' must be an array of " +
                                std::to_string(config.labels.size()) + " numbers");
        std::vector<double> w;
        w.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
          w.push_back(json_real(v[i], line_no, "prediction '" + spec.name + "'"));
        rec.predictions.emplace(spec.name, PropertyValue(checked_pmf(
                                               space, std::move(w), spec.name, line_no,
                                               &warnings)));
      } else if (spec.kind == "real") {
        rec.predictions.emplace(
            spec.name,
            PropertyValue(json_real(v, line_no, "prediction '" + spec.name + "'")));
      } else {
        if (!v.is_string() || v.get<std::string>().empty())
          row_fail(line_no, "prediction '" + spec.name + "' must be a nonempty string");
        rec.predictions.emplace(spec.name, PropertyValue(v.get<std::string>()));
      }
    }
    if (!config.groups.empty()) {
      if (!row.contains("groups") || !row["groups"].is_object())
        row_fail(line_no, "missing object key 'groups'");
      const json& groups = row["groups"];
      for (const std::string& g : config.groups) {
        if (!groups.contains(g)) row_fail(line_no, "missing group '" + g + "'");
        const json& v = groups[g];
        if (v.is_boolean()) {
          rec.groups[g] = v.get<bool>();
        } else if (v.is_number_integer() &&
                   (v.get<long long>() == 0 || v.get<long long>() == 1)) {
          rec.groups[g] = v.get<long long>() == 1;
        } else {
          row_fail(line_no, "group '" + g + "' must be 0 or 1");
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return IngestResult{PredictionDataset(config.input_path, space, std::move(records)),
                      std::move(warnings)};
}

}  // namespace

IngestResult ingest_text(const AuditConfig& config, const std::string& text) {
  SpacePtr space = make_space(config.labels, config.embedding);
  if (config.format == "csv") return ingest_csv(config, space, text);
  return ingest_jsonl(config, space, text);
}

IngestResult ingest(const AuditConfig& config) {
  namespace fs = std::filesystem;
  fs::path p = config.input_path;
  if (p.is_relative() && !config.config_path.empty())
    p = fs::path(config.config_path).parent_path() / p;
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read input file '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_text(config, buf.str());
}

std::string dataset_to_jsonl(const PredictionDataset& data) {
  const std::vector<std::string>& labels = data.space()->labels();
  std::string out;
  for (const Record& r : data.records()) {
    out += "{\"x_id\":\"" + json_escape(r.x_id) + "\",\"y\":\"" + json_escape(labels[r.y]) +
           "\",\"weight\":" + format_real(r.weight) + ",\"pred\":{";
    bool first = true;
    for (const auto& [name, v] : r.predictions) {
      if (!first) out += ",";
      first = false;
      out += "\"" + json_escape(name) + "\":";
      switch (v.kind()) {
        case PropertyValue::Kind::kReal:
          out += format_real(v.real());
          break;
        case PropertyValue::Kind::kToken:
          out += "\"" + json_escape(v.token()) + "\"";
          break;
        case PropertyValue::Kind::kRanking: {
          out += "[";
          for (std::size_t i = 0; i < v.ranking().size(); ++i) {
            if (i) out += ",";
            out += "\"" + json_escape(v.ranking()[i]) + "\"";
          }
          out += "]";
          break;
        }
        case PropertyValue::Kind::kDistribution: {
          out += "[";
          const std::vector<double>& w = v.distribution().weights();
          for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) out += ",";
            out += format_real(w[i]);
          }
          out += "]";
          break;
        }
      }
    }
    out += "}";
    if (!r.groups.empty()) {
      out += ",\"groups\":{";
      first = true;
      for (const auto& [g, flag] : r.groups) {
        if (!first) out += ",";
        first = false;
        out += "\"" + json_escape(g) + "\":" + (flag ? "1" : "0");
      }
      out += "}";
    }
    out += "}\n";
  }
  return out;
}

}  // namespace calibatlas
