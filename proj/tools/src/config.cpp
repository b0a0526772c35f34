#include "elaudit/cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "elaudit/dataset.hpp"
#include "elaudit/error.hpp"

namespace elaudit::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::Config, message); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) fail("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_string()) fail(where + "." + key + " must be a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& where, const char* key, double fallback) {
  return obj.contains(key) ? get_number(obj, where, key) : fallback;
}

MetricSpec parse_metric(const json& j) {
  const std::string where = "metric";
  check_keys(j, where, {"kind", "column", "outcome", "threshold"});
  const std::string kind = get_string(j, where, "kind");
  if (kind == "column") return MetricSpec::of_column(get_string(j, where, "column"));
  if (kind == "outcome_column") return MetricSpec::outcome_column(get_string(j, where, "column"));
  if (kind == "squared_error") {
    return MetricSpec::squared_error(get_string(j, where, "column"), get_string(j, where, "outcome"));
  }
  if (kind == "residual") return MetricSpec::residual(get_string(j, where, "column"), get_string(j, where, "outcome"));
  if (kind == "positive_indicator") {
    return MetricSpec::positive_indicator(get_string(j, where, "column"), get_number(j, where, "threshold"));
  }
  fail("unknown metric kind '" + kind + "'");
}

Clause::Op parse_op(const std::string& op) {
  if (op == "eq") return Clause::Op::Eq;
  if (op == "ne") return Clause::Op::Ne;
  if (op == "lt") return Clause::Op::Lt;
  if (op == "le") return Clause::Op::Le;
  if (op == "gt") return Clause::Op::Gt;
  if (op == "ge") return Clause::Op::Ge;
  if (op == "in") return Clause::Op::InSet;
  fail("unknown clause op '" + op + "'");
}

GroupSpec parse_group(const json& j, const std::string& where) {
  check_keys(j, where, {"id", "predicate"});
  GroupSpec g;
  g.id = get_string(j, where, "id");
  if (const auto it = j.find("predicate"); it != j.end()) {
    if (!it->is_array()) fail(where + ".predicate must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const json& c = (*it)[k];
      const std::string cw = where + ".predicate[" + std::to_string(k) + "]";
      check_keys(c, cw, {"column", "op", "literals"});
      Clause clause;
      clause.column = get_string(c, cw, "column");
      clause.op = parse_op(get_string(c, cw, "op"));
      const json& lits = require(c, cw, "literals");
      if (!lits.is_array() || lits.empty()) fail(cw + ".literals must be a nonempty array");
      for (const json& lit : lits) {
        if (lit.is_string()) {
          clause.literals.push_back(lit.get<std::string>());
        } else if (lit.is_number()) {
          clause.literals.push_back(format_number(lit.get<double>()));
        } else {
          fail(cw + ".literals entries must be strings or numbers");
        }
      }
      if (clause.op != Clause::Op::InSet && clause.literals.size() != 1) {
        fail(cw + " takes exactly one literal unless op is 'in'");
      }
      g.predicate.push_back(std::move(clause));
    }
  }
  return g;
}

TargetSpec parse_target(const json& j) {
  const std::string where = "target";
  check_keys(j, where, {"kind", "theta", "group"});
  const std::string kind = get_string(j, where, "kind");
  if (kind == "known") return TargetSpec::known(get_number(j, where, "theta"));
  if (kind == "population_mean") return TargetSpec::population_mean();
  if (kind == "reference_group") return TargetSpec::reference_group(parse_group(require(j, where, "group"), "target.group"));
  fail("unknown target kind '" + kind + "'");
}

HypothesisSpec parse_hypothesis(const json& j) {
  const std::string where = "hypothesis";
  check_keys(j, where, {"kind", "eps0", "eps1", "eps2"});
  const std::string kind = get_string(j, where, "kind");
  if (kind == "point") return HypothesisSpec::point(number_or(j, where, "eps0", 0.0));
  if (kind == "at_least") return HypothesisSpec::at_least(get_number(j, where, "eps0"));
  if (kind == "at_most") return HypothesisSpec::at_most(get_number(j, where, "eps0"));
  if (kind == "interval") return HypothesisSpec::interval(get_number(j, where, "eps1"), get_number(j, where, "eps2"));
  fail("unknown hypothesis kind '" + kind + "'");
}

}  // namespace

std::string to_string(AuditMethod method) {
  switch (method) {
    case AuditMethod::EL: return "el";
    case AuditMethod::EEL: return "eel";
    case AuditMethod::Bootstrap: return "bootstrap";
  }
  return "el";
}

AuditMethod parse_method(const std::string& text) {
  if (text == "el") return AuditMethod::EL;
  if (text == "eel") return AuditMethod::EEL;
  if (text == "bootstrap") return AuditMethod::Bootstrap;
  fail("unknown method '" + text + "'");
}

AuditConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "config",
             {"dataset_path", "metric", "groups", "target", "hypothesis", "alpha", "method", "seed", "output_path"});
  AuditConfig cfg;
  std::filesystem::path data = get_string(doc, "config", "dataset_path");
  cfg.dataset_path = (data.is_relative() && !base_dir.empty() ? base_dir / data : data).string();
  cfg.metric = parse_metric(require(doc, "config", "metric"));

  const json& groups = require(doc, "config", "groups");
  if (!groups.is_array() || groups.empty()) fail("config.groups must be a nonempty array");
  std::set<std::string> seen;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    GroupSpec g = parse_group(groups[k], "groups[" + std::to_string(k) + "]");
    if (!seen.insert(g.id).second) fail("duplicate group id '" + g.id + "'");
    cfg.groups.push_back(std::move(g));
  }

  cfg.target = parse_target(require(doc, "config", "target"));
  cfg.hypothesis = parse_hypothesis(require(doc, "config", "hypothesis"));
  cfg.alpha = number_or(doc, "config", "alpha", 0.05);
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5)) fail("alpha must lie in (0, 0.5]");
  if (doc.contains("method")) cfg.method = parse_method(get_string(doc, "config", "method"));
  if (const auto it = doc.find("seed"); it != doc.end()) {
    const bool ok = it->is_number_unsigned() || (it->is_number_integer() && it->get<std::int64_t>() >= 0);
    if (!ok) fail("config.seed must be a nonnegative integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  if (doc.contains("output_path")) cfg.output_path = get_string(doc, "config", "output_path");
  return cfg;
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, "config '" + path.string() + "': " + e.what());
  }
}

void apply_overrides(json& doc, const ConfigOverrides& overrides) {
  if (overrides.alpha) doc["alpha"] = *overrides.alpha;
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.method) doc["method"] = *overrides.method;
  if (overrides.output_path) doc["output_path"] = *overrides.output_path;
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace elaudit::cli
