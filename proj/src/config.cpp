// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "calibatlas/error.hpp"

namespace calibatlas {
namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& msg) {
  fail(ErrorCode::kConfigError, msg);
}

const json* find_key(const json& o, const std::string& key) {
  auto it = o.find(key);
  return it == o.end() ? nullptr : &*it;
}

const json& require_key(const json& o, const std::string& key, const std::string& ctx) {
  const json* p = find_key(o, key);
  if (!p) config_fail(ctx + ": missing key '" + key + "'");
  return *p;
}

void require_object(const json& v, const std::string& ctx) {
  if (!v.is_object()) config_fail(ctx + " must be an object");
}

void require_array(const json& v, const std::string& ctx) {
  if (!v.is_array()) config_fail(ctx + " must be an array");
}

std::string as_string(const json& v, const std::string& ctx) {
  if (!v.is_string()) config_fail(ctx + " must be a string");
  return v.get<std::string>();
}

double as_real(const json& v, const std::string& ctx) {
  if (!v.is_number()) config_fail(ctx + " must be a number");
  return v.get<double>();
}

std::uint64_t as_seed(const json& v, const std::string& ctx) {
  if (!v.is_number_unsigned()) config_fail(ctx + " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::size_t as_count(const json& v, const std::string& ctx) {
  if (!v.is_number_unsigned()) config_fail(ctx + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> as_real_vector(const json& v, const std::string& ctx) {
  require_array(v, ctx);
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_real(v[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> as_string_vector(const json& v, const std::string& ctx) {
  require_array(v, ctx);
  std::vector<std::string> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_string(v[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown_keys(const json& o, std::initializer_list<const char*> allowed,
                         const std::string& ctx) {
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known |= (it.key() == k);
    if (!known) config_fail(ctx + ": unknown key '" + it.key() + "'");
  }
}

// Declared names feed the colon-separated quantity grammar and plot file
// names, so they are restricted to a portable identifier alphabet.
bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalnum(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_' || c == '.' || c == '-')) return false;
  }
  return true;
}

std::string checked_name(const json& v, const std::string& ctx) {
  std::string s = as_string(v, ctx);
  if (!valid_name(s))
    config_fail(ctx + ": name '" + s + "' must match [A-Za-z0-9_][A-Za-z0-9_.-]*");
  return s;
}

// --- static quantity-grammar validation --------------------------------------

struct Catalog {
  std::map<std::string, std::string> predictions;  // name -> kind
  std::map<std::string, std::string> properties;   // name -> catalog kind
  std::map<std::string, std::string> losses;       // name -> kind
  std::set<std::string> idents;
  std::set<std::string> groups;
};

// Value kind a catalog property evaluates to, in prediction-kind vocabulary.
std::string property_output_kind(const std::string& kind) {
  if (kind == "mode" || kind == "simple_binary") return "token";
  if (kind == "ranking") return "ranking";
  if (kind == "full_distribution") return "dist";
  return "real";
}

// Value kind of a loss's decisions.
std::string loss_decision_kind(const std::string& kind) {
  if (kind == "zero_one" || kind == "simple") return "token";
  return "real";
}

[[noreturn]] void quantity_fail(const std::string& quantity, const std::string& why) {
  config_fail("metric quantity '" + quantity + "': " + why);
}

std::vector<std::string> split_tokens(const std::string& quantity) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : quantity) {
    if (c == ':') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

const std::string& pred_kind(const Catalog& c, const std::string& name,
                             const std::string& q) {
  auto it = c.predictions.find(name);
  if (it == c.predictions.end()) quantity_fail(q, "unknown prediction '" + name + "'");
  return it->second;
}

void need_loss(const Catalog& c, const std::string& name, const std::string& q) {
  if (!c.losses.count(name)) quantity_fail(q, "unknown loss '" + name + "'");
}

void validate_per_level(const Catalog& c, const std::vector<std::string>& t,
                        const std::string& q) {
  if (t.empty()) quantity_fail(q, "empty per-level quantity");
  const std::string& head = t[0];
  if (head == "vanilla") {
    if (t.size() != 2) quantity_fail(q, "expected vanilla:<pred>");
    if (pred_kind(c, t[1], q) != "real")
      quantity_fail(q, "vanilla needs a real-valued prediction");
    return;
  }
  if (head == "gamma") {
    if (t.size() != 3) quantity_fail(q, "expected gamma:<pred>:<prop>");
    auto it = c.properties.find(t[2]);
    if (it == c.properties.end()) quantity_fail(q, "unknown property '" + t[2] + "'");
    if (pred_kind(c, t[1], q) != property_output_kind(it->second))
      quantity_fail(q, "prediction '" + t[1] + "' does not carry " + it->second +
                           " values");
    return;
  }
  if (head == "dist") {
    if (t.size() != 3) quantity_fail(q, "expected dist:<pred>:<prop>");
    if (pred_kind(c, t[1], q) != "dist")
      quantity_fail(q, "dist needs a distributional prediction");
    if (!c.properties.count(t[2])) quantity_fail(q, "unknown property '" + t[2] + "'");
    return;
  }
  if (head == "swap") {
    if (t.size() != 3) quantity_fail(q, "expected swap:<pred>:<loss>");
    auto it = c.losses.find(t[2]);
    if (it == c.losses.end()) quantity_fail(q, "unknown loss '" + t[2] + "'");
    if (pred_kind(c, t[1], q) != loss_decision_kind(it->second))
      quantity_fail(q, "prediction '" + t[1] + "' does not carry decisions of loss '" +
                           t[2] + "'");
    return;
  }
  quantity_fail(q, "'" + head + "' is not a per-level quantity");
}

void validate_quantity(const Catalog& c, const std::string& q) {
  std::vector<std::string> t = split_tokens(q);
  const std::string& head = t[0];
  if (head == "vanilla" || head == "gamma" || head == "dist" || head == "swap") {
    validate_per_level(c, t, q);
    return;
  }
  if (head == "decision" || head == "decision_signed" || head == "downstream_cost") {
    if (t.size() != 3) quantity_fail(q, "expected " + head + ":<pred>:<loss>");
    if (pred_kind(c, t[1], q) != "dist")
      quantity_fail(q, head + " needs a distributional prediction");
    need_loss(c, t[2], q);
    return;
  }
  if (head == "bayes_risk" || head == "bayes_risk_signed") {
    if (t.size() != 4) quantity_fail(q, "expected " + head + ":<g>:<h>:<loss>");
    auto it = c.losses.find(t[3]);
    if (it == c.losses.end()) quantity_fail(q, "unknown loss '" + t[3] + "'");
    if (pred_kind(c, t[1], q) != loss_decision_kind(it->second))
      quantity_fail(q, "decision prediction '" + t[1] +
                           "' does not carry decisions of loss '" + t[3] + "'");
    if (pred_kind(c, t[2], q) != "real")
      quantity_fail(q, "risk prediction '" + t[2] + "' must be real-valued");
    return;
  }
  if (head == "marginal_bayes_risk") {
    if (t.size() != 2) quantity_fail(q, "expected marginal_bayes_risk:<loss>");
    need_loss(c, t[1], q);
    return;
  }
  if (head == "cost_gap") {
    if (t.size() != 4) quantity_fail(q, "expected cost_gap:<pred>:<loss1>:<loss2>");
    if (pred_kind(c, t[1], q) != "dist")
      quantity_fail(q, "cost_gap needs a distributional prediction");
    need_loss(c, t[2], q);
    need_loss(c, t[3], q);
    return;
  }
  if (head == "agg") {
    if (t.size() < 3) quantity_fail(q, "expected agg:<mode>:<quantity...>");
    if (t[1] != "expected" && t[1] != "expected_square" && t[1] != "sup")
      quantity_fail(q, "unknown aggregation '" + t[1] + "'");
    validate_per_level(c, {t.begin() + 2, t.end()}, q);
    return;
  }
  if (head == "group") {
    if (t.size() < 4) quantity_fail(q, "expected group:<group>:<mode>:<quantity...>");
    if (!c.groups.count(t[1])) quantity_fail(q, "unknown group '" + t[1] + "'");
    if (t[2] != "expected" && t[2] != "expected_square" && t[2] != "sup")
      quantity_fail(q, "unknown aggregation '" + t[2] + "'");
    validate_per_level(c, {t.begin() + 3, t.end()}, q);
    return;
  }
  if (head == "robust_swap_raw" || head == "robust_swap_norm") {
    if (t.size() != 3) quantity_fail(q, "expected " + head + ":<pred>:<ident>");
    if (pred_kind(c, t[1], q) != "real")
      quantity_fail(q, head + " needs a real-valued prediction");
    if (!c.idents.count(t[2])) quantity_fail(q, "unknown identification '" + t[2] + "'");
    return;
  }
  quantity_fail(q, "unknown quantity head '" + head + "'");
}

// --- section parsers ----------------------------------------------------------

void parse_input(const json& root, AuditConfig* cfg) {
  const json& in = require_key(root, "input", "config");
  require_object(in, "config.input");
  reject_unknown_keys(in, {"path", "format"}, "config.input");
  cfg->input_path = as_string(require_key(in, "path", "config.input"), "config.input.path");
  cfg->format = as_string(require_key(in, "format", "config.input"), "config.input.format");
  if (cfg->format != "csv" && cfg->format != "jsonl")
    config_fail("config.input.format must be 'csv' or 'jsonl'");
}

void parse_space(const json& root, AuditConfig* cfg) {
  const json& sp = require_key(root, "outcome_space", "config");
  require_object(sp, "config.outcome_space");
  reject_unknown_keys(sp, {"labels", "embedding"}, "config.outcome_space");
  cfg->labels =
      as_string_vector(require_key(sp, "labels", "config.outcome_space"), "config.outcome_space.labels");
  if (cfg->labels.size() < 2) config_fail("config.outcome_space.labels needs at least 2 labels");
  std::set<std::string> seen;
  for (const std::string& l : cfg->labels) {
    if (l.empty()) config_fail("config.outcome_space.labels: empty label");
    if (!seen.insert(l).second)
      config_fail("config.outcome_space.labels: duplicate label '" + l + "'");
  }
  if (const json* e = find_key(sp, "embedding")) {
    cfg->embedding = as_real_vector(*e, "config.outcome_space.embedding");
    if (cfg->embedding->size() != cfg->labels.size())
      config_fail("config.outcome_space.embedding length differs from labels");
  }
}

void parse_predictions(const json& root, AuditConfig* cfg) {
  const json* preds = find_key(root, "predictions");
  if (!preds) return;
  require_array(*preds, "config.predictions");
  std::set<std::string> names;
  for (std::size_t i = 0; i < preds->size(); ++i) {
    std::string ctx = "config.predictions[" + std::to_string(i) + "]";
    const json& p = (*preds)[i];
    require_object(p, ctx);
    reject_unknown_keys(p, {"name", "kind", "columns"}, ctx);
    PredictionSpec spec;
    spec.name = checked_name(require_key(p, "name", ctx), ctx + ".name");
    if (!names.insert(spec.name).second)
      config_fail(ctx + ": duplicate prediction '" + spec.name + "'");
    spec.kind = as_string(require_key(p, "kind", ctx), ctx + ".kind");
    if (spec.kind != "dist" && spec.kind != "real" && spec.kind != "token")
      config_fail(ctx + ".kind must be 'dist', 'real', or 'token'");
    if (const json* cols = find_key(p, "columns"))
      spec.columns = as_string_vector(*cols, ctx + ".columns");
    if (spec.kind == "dist") {
      if (!spec.columns.empty() && spec.columns.size() != cfg->labels.size())
        config_fail(ctx + ".columns must list one column per outcome label");
    } else if (spec.columns.size() > 1) {
      config_fail(ctx + ".columns: scalar predictions take at most one column");
    }
    cfg->predictions.push_back(std::move(spec));
  }
}

void parse_properties(const json& root, AuditConfig* cfg) {
  const json* props = find_key(root, "properties");
  if (!props) return;
  require_array(*props, "config.properties");
  std::set<std::string> names;
  for (std::size_t i = 0; i < props->size(); ++i) {
    std::string ctx = "config.properties[" + std::to_string(i) + "]";
    const json& p = (*props)[i];
    require_object(p, ctx);
    reject_unknown_keys(p, {"name", "kind", "tau", "q", "g", "h"}, ctx);
    PropertySpec spec;
    spec.name = checked_name(require_key(p, "name", ctx), ctx + ".name");
    if (!names.insert(spec.name).second)
      config_fail(ctx + ": duplicate property '" + spec.name + "'");
    spec.kind = as_string(require_key(p, "kind", ctx), ctx + ".kind");
    if (const json* v = find_key(p, "tau")) spec.params.tau = as_real(*v, ctx + ".tau");
    if (const json* v = find_key(p, "q")) spec.params.q = as_real(*v, ctx + ".q");
    if (const json* v = find_key(p, "g")) spec.params.g = as_real_vector(*v, ctx + ".g");
    if (const json* v = find_key(p, "h")) spec.params.h = as_real_vector(*v, ctx + ".h");
    cfg->properties.push_back(std::move(spec));
  }
}

void parse_identifications(const json& root, AuditConfig* cfg) {
  const json* ids = find_key(root, "identifications");
  if (!ids) return;
  require_array(*ids, "config.identifications");
  std::set<std::string> names;
  for (std::size_t i = 0; i < ids->size(); ++i) {
    std::string ctx = "config.identifications[" + std::to_string(i) + "]";
    const json& p = (*ids)[i];
    require_object(p, ctx);
    reject_unknown_keys(p, {"name", "kind", "tau", "level", "g", "h", "gamma0", "n_quad", "grid"},
                        ctx);
    IdentSpec spec;
    spec.name = checked_name(require_key(p, "name", ctx), ctx + ".name");
    if (!names.insert(spec.name).second)
      config_fail(ctx + ": duplicate identification '" + spec.name + "'");
    spec.kind = as_string(require_key(p, "kind", ctx), ctx + ".kind");
    if (const json* v = find_key(p, "tau")) spec.tau = as_real(*v, ctx + ".tau");
    if (const json* v = find_key(p, "level")) spec.level = as_real(*v, ctx + ".level");
    if (const json* v = find_key(p, "g")) spec.g = as_real_vector(*v, ctx + ".g");
    if (const json* v = find_key(p, "h")) spec.h = as_real_vector(*v, ctx + ".h");
    if (const json* v = find_key(p, "gamma0")) spec.gamma0 = as_real(*v, ctx + ".gamma0");
    if (const json* v = find_key(p, "n_quad")) {
      spec.n_quad = as_count(*v, ctx + ".n_quad");
      if (spec.n_quad == 0) config_fail(ctx + ".n_quad must be positive");
    }
    if (const json* v = find_key(p, "grid")) spec.grid = as_real_vector(*v, ctx + ".grid");
    cfg->identifications.push_back(std::move(spec));
  }
}

void parse_losses(const json& root, AuditConfig* cfg) {
  const json* losses = find_key(root, "losses");
  if (!losses) return;
  require_array(*losses, "config.losses");
  std::set<std::string> names;
  for (std::size_t i = 0; i < losses->size(); ++i) {
    std::string ctx = "config.losses[" + std::to_string(i) + "]";
    const json& p = (*losses)[i];
    require_object(p, ctx);
    reject_unknown_keys(
        p, {"name", "kind", "tau", "q", "identification", "gamma0", "n_quad", "grid"}, ctx);
    LossSpec spec;
    spec.name = checked_name(require_key(p, "name", ctx), ctx + ".name");
    if (!names.insert(spec.name).second)
      config_fail(ctx + ": duplicate loss '" + spec.name + "'");
    spec.kind = as_string(require_key(p, "kind", ctx), ctx + ".kind");
    if (const json* v = find_key(p, "tau")) spec.tau = as_real(*v, ctx + ".tau");
    if (const json* v = find_key(p, "q")) spec.q = as_real(*v, ctx + ".q");
    if (const json* v = find_key(p, "identification"))
      spec.identification = as_string(*v, ctx + ".identification");
    if (const json* v = find_key(p, "gamma0")) spec.gamma0 = as_real(*v, ctx + ".gamma0");
    if (const json* v = find_key(p, "n_quad")) {
      spec.n_quad = as_count(*v, ctx + ".n_quad");
      if (*spec.n_quad == 0) config_fail(ctx + ".n_quad must be positive");
    }
    if (const json* v = find_key(p, "grid")) spec.grid = as_real_vector(*v, ctx + ".grid");
    cfg->losses.push_back(std::move(spec));
  }
}

void parse_metrics(const json& root, AuditConfig* cfg) {
  const json& metrics = require_key(root, "metrics", "config");
  require_array(metrics, "config.metrics");
  if (metrics.empty()) config_fail("config.metrics must declare at least one metric");
  std::set<std::string> names;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    std::string ctx = "config.metrics[" + std::to_string(i) + "]";
    const json& p = metrics[i];
    require_object(p, ctx);
    reject_unknown_keys(p, {"name", "quantity", "tolerance", "expected"}, ctx);
    MetricSpec spec;
    spec.name = checked_name(require_key(p, "name", ctx), ctx + ".name");
    if (!names.insert(spec.name).second)
      config_fail(ctx + ": duplicate metric '" + spec.name + "'");
    spec.quantity = as_string(require_key(p, "quantity", ctx), ctx + ".quantity");
    if (const json* v = find_key(p, "tolerance")) {
      spec.tolerance = as_real(*v, ctx + ".tolerance");
      if (!(*spec.tolerance >= 0)) config_fail(ctx + ".tolerance must be nonnegative");
    }
    if (const json* v = find_key(p, "expected")) spec.expected = as_real(*v, ctx + ".expected");
    cfg->metrics.push_back(std::move(spec));
  }
}

void parse_rest(const json& root, AuditConfig* cfg) {
  if (const json* g = find_key(root, "groups")) {
    require_array(*g, "config.groups");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < g->size(); ++i) {
      std::string name = checked_name((*g)[i], "config.groups[" + std::to_string(i) + "]");
      if (!seen.insert(name).second) config_fail("config.groups: duplicate group '" + name + "'");
      cfg->groups.push_back(name);
    }
  }
  if (const json* t = find_key(root, "tolerances")) {
    require_object(*t, "config.tolerances");
    for (auto it = t->begin(); it != t->end(); ++it) {
      double v = as_real(it.value(), "config.tolerances." + it.key());
      if (!(v >= 0)) config_fail("config.tolerances." + it.key() + " must be nonnegative");
      cfg->tolerances[it.key()] = v;
    }
  }
  if (const json* a = find_key(root, "aggregation")) {
    cfg->aggregation = as_string(*a, "config.aggregation");
    if (cfg->aggregation != "expected" && cfg->aggregation != "expected_square" &&
        cfg->aggregation != "sup")
      config_fail("config.aggregation must be 'expected', 'expected_square', or 'sup'");
  }
  if (const json* s = find_key(root, "seed")) cfg->seed = as_seed(*s, "config.seed");
}

// --- catalog construction (shared by validation and scenario building) -------

void require_embedding(const AuditConfig& cfg, const std::string& what) {
  if (!cfg.embedding)
    config_fail(what + " needs a numeric outcome embedding (config.outcome_space.embedding)");
}

std::vector<PropertyValue> real_grid(const std::vector<double>& values) {
  std::vector<PropertyValue> out;
  out.reserve(values.size());
  for (double v : values) out.emplace_back(v);
  return out;
}

// 33-point default decision grid spanning the embedding range.
std::vector<PropertyValue> default_real_grid(const SpacePtr& space) {
  const std::vector<double>& e = space->embedding();
  double lo = *std::min_element(e.begin(), e.end());
  double hi = *std::max_element(e.begin(), e.end());
  if (lo == hi) return {PropertyValue(lo)};
  std::vector<PropertyValue> out;
  const std::size_t n = 33;
  for (std::size_t i = 0; i < n; ++i)
    out.emplace_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

std::vector<PropertyValue> label_grid(const SpacePtr& space) {
  std::vector<PropertyValue> out;
  for (const std::string& l : space->labels()) out.emplace_back(l);
  return out;
}

IdentificationFn build_ident(const AuditConfig& cfg, const SpacePtr& space,
                             const IdentSpec& spec) {
  const std::string ctx = "identification '" + spec.name + "'";
  if (spec.kind == "mean") {
    require_embedding(cfg, ctx);
    return make_mean_identification(space);
  }
  if (spec.kind == "quantile") {
    require_embedding(cfg, ctx);
    if (!spec.tau) config_fail(ctx + ": quantile needs tau");
    return make_quantile_identification(space, *spec.tau);
  }
  if (spec.kind == "ratio") {
    if (!spec.g || !spec.h) config_fail(ctx + ": ratio needs g and h");
    return make_ratio_identification(space, *spec.g, *spec.h);
  }
  if (spec.kind == "variance_on_mean_level") {
    require_embedding(cfg, ctx);
    if (!spec.level) config_fail(ctx + ": variance_on_mean_level needs level");
    return make_variance_on_mean_level(space, *spec.level);
  }
  if (spec.kind == "cvar_on_quantile_level") {
    require_embedding(cfg, ctx);
    if (!spec.level || !spec.tau) config_fail(ctx + ": cvar_on_quantile_level needs level and tau");
    return make_cvar_on_quantile_level(space, *spec.level, *spec.tau);
  }
  config_fail(ctx + ": unknown kind '" + spec.kind + "'");
}

ScenarioLoss build_loss(const AuditConfig& cfg, const SpacePtr& space, const LossSpec& spec,
                        const std::map<std::string, ScenarioIdent>& idents) {
  const std::string ctx = "loss '" + spec.name + "'";
  ScenarioLoss out;
  if (spec.kind == "squared" || spec.kind == "pinball") {
    require_embedding(cfg, ctx);
    if (spec.kind == "squared") {
      out.loss = make_squared_loss(space);
    } else {
      if (!spec.tau) config_fail(ctx + ": pinball needs tau");
      out.loss = make_pinball_loss(space, *spec.tau);
    }
    out.grid = spec.grid.empty() ? default_real_grid(space) : real_grid(spec.grid);
    return out;
  }
  if (spec.kind == "zero_one") {
    if (!spec.grid.empty()) config_fail(ctx + ": zero_one decisions are labels, not a real grid");
    out.loss = make_zero_one_loss(space);
    out.grid = label_grid(space);
    return out;
  }
  if (spec.kind == "simple") {
    if (!spec.grid.empty()) config_fail(ctx + ": simple decisions are {a, b}, not a real grid");
    if (!spec.q) config_fail(ctx + ": simple needs q");
    SimpleLossPair pair = make_simple_loss(space, *spec.q);
    out.loss = pair.loss;
    out.grid = pair.grid;
    return out;
  }
  if (spec.kind == "from_identification") {
    if (spec.identification.empty()) config_fail(ctx + ": from_identification needs identification");
    auto it = idents.find(spec.identification);
    if (it == idents.end())
      config_fail(ctx + ": unknown identification '" + spec.identification + "'");
    const ScenarioIdent& si = it->second;
    double gamma0 = spec.gamma0.value_or(si.gamma0);
    std::size_t n_quad = spec.n_quad.value_or(si.n_quad);
    out.loss = loss_from_identification(si.v, gamma0, {}, n_quad);
    out.grid = spec.grid.empty() ? si.grid : real_grid(spec.grid);
    return out;
  }
  config_fail(ctx + ": unknown kind '" + spec.kind + "'");
}

// Instantiates properties/identifications/losses for `space`; `scenario` may
// be null when only validating. Construction errors surface as ConfigError.
void build_catalog(const AuditConfig& cfg, const SpacePtr& space, Scenario* scenario) {
  for (const PropertySpec& ps : cfg.properties) {
    std::string ctx = "property '" + ps.name + "'";
    if (ps.kind == "mean" || ps.kind == "quantile" || ps.kind == "variance" || ps.kind == "cvar")
      require_embedding(cfg, ctx);
    Property prop;
    try {
      prop = make_standard_property(space, ps.kind, ps.params);
    } catch (const Error& e) {
      config_fail(ctx + ": " + e.what());
    }
    prop.name = ps.name;
    if (scenario) scenario->properties.emplace(ps.name, std::move(prop));
  }
  std::map<std::string, ScenarioIdent> idents;
  for (const IdentSpec& is : cfg.identifications) {
    ScenarioIdent si;
    try {
      si.v = build_ident(cfg, space, is);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfigError) throw;
      config_fail("identification '" + is.name + "': " + e.what());
    }
    si.gamma0 = is.gamma0;
    si.n_quad = is.n_quad;
    if (is.grid.empty()) {
      require_embedding(cfg, "identification '" + is.name + "' (default grid)");
      si.grid = default_real_grid(space);
    } else {
      si.grid = real_grid(is.grid);
    }
    idents.emplace(is.name, std::move(si));
  }
  for (const LossSpec& ls : cfg.losses) {
    ScenarioLoss sl;
    try {
      sl = build_loss(cfg, space, ls, idents);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfigError) throw;
      config_fail("loss '" + ls.name + "': " + e.what());
    }
    if (scenario) scenario->losses.emplace(ls.name, std::move(sl));
  }
  if (scenario) scenario->idents = std::move(idents);
}

void validate(const AuditConfig& cfg) {
  // Constructing the catalog validates parameters against the outcome space.
  SpacePtr space = make_space(cfg.labels, cfg.embedding);
  build_catalog(cfg, space, nullptr);

  Catalog cat;
  for (const PredictionSpec& p : cfg.predictions) cat.predictions[p.name] = p.kind;
  for (const PropertySpec& p : cfg.properties) cat.properties[p.name] = p.kind;
  for (const LossSpec& l : cfg.losses) cat.losses[l.name] = l.kind;
  for (const IdentSpec& i : cfg.identifications) cat.idents.insert(i.name);
  for (const std::string& g : cfg.groups) cat.groups.insert(g);
  for (const MetricSpec& m : cfg.metrics) validate_quantity(cat, m.quantity);
}

}  // namespace

AuditConfig parse_audit_config(const std::string& json_text, const std::string& path) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    config_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) config_fail("config root must be an object");
  reject_unknown_keys(root,
                      {"input", "outcome_space", "predictions", "properties", "losses",
                       "identifications", "metrics", "groups", "tolerances", "aggregation",
                       "seed"},
                      "config");
  AuditConfig cfg;
  cfg.raw_bytes = json_text;
  cfg.config_path = path;
  parse_input(root, &cfg);
  parse_space(root, &cfg);
  parse_predictions(root, &cfg);
  parse_properties(root, &cfg);
  parse_identifications(root, &cfg);
  parse_losses(root, &cfg);
  parse_metrics(root, &cfg);
  parse_rest(root, &cfg);
  validate(cfg);
  return cfg;
}

AuditConfig parse_audit_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_audit_config(buf.str(), path);
}

Scenario scenario_from_config(const AuditConfig& config, PredictionDataset dataset) {
  Scenario s;
  s.name = "audit:" + config_hash(config.raw_bytes);
  build_catalog(config, dataset.space(), &s);
  s.dataset = std::move(dataset);
  return s;
}

std::string config_hash(const std::string& raw_bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : raw_bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace calibatlas
