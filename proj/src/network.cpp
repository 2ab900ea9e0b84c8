#include "cautious/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cautious {

using nlohmann::json;

int Variable::state_index(std::string_view label) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == label) return static_cast<int>(i);
  }
  return -1;
}

int find_variable(std::span<const Variable> vars, std::string_view name) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

constexpr double kCptTolerance = 1e-9;

void check_acyclic(const std::vector<Variable>& vars, const std::vector<std::vector<VarId>>& parents) {
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> mark(vars.size(), 0);
  std::function<void(VarId)> visit = [&](VarId v) {
    mark[static_cast<std::size_t>(v)] = 1;
    for (VarId p : parents[static_cast<std::size_t>(v)]) {
      if (mark[static_cast<std::size_t>(p)] == 1) {
        throw ModelError("cycle detected through variable '" + vars[static_cast<std::size_t>(p)].name + "'");
      }
      if (mark[static_cast<std::size_t>(p)] == 0) visit(p);
    }
    mark[static_cast<std::size_t>(v)] = 2;
  };
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (mark[v] == 0) visit(static_cast<VarId>(v));
  }
}

}  // namespace

BayesianNetwork::BayesianNetwork(std::vector<Variable> variables, std::vector<std::vector<VarId>> parents,
                                 std::vector<Potential> cpts)
    : variables_(std::move(variables)), parents_(std::move(parents)), cpts_(std::move(cpts)) {
  const std::size_t n = variables_.size();
  if (parents_.size() != n || cpts_.size() != n) {
    throw ModelError("network: every variable needs a parent list and a CPT");
  }
  std::set<std::string> names;
  for (const auto& v : variables_) {
    if (v.name.empty()) throw ModelError("network: empty variable name");
    if (!names.insert(v.name).second) throw ModelError("network: duplicate variable '" + v.name + "'");
    if (v.states.empty()) throw ModelError("network: variable '" + v.name + "' has no states");
    std::set<std::string> labels(v.states.begin(), v.states.end());
    if (labels.size() != v.states.size()) {
      throw ModelError("network: duplicate state label in variable '" + v.name + "'");
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<VarId> family{static_cast<VarId>(v)};
    std::vector<int> cards{variables_[v].cardinality()};
    for (VarId p : parents_[v]) {
      if (p < 0 || static_cast<std::size_t>(p) >= n) throw ModelError("network: parent index out of range");
      family.push_back(p);
      cards.push_back(variables_[static_cast<std::size_t>(p)].cardinality());
    }
    Domain expected;
    try {
      expected = Domain(family, cards);
    } catch (const StructuralError&) {
      throw ModelError("network: variable '" + variables_[v].name + "' lists a parent twice or itself");
    }
    if (!(cpts_[v].domain() == expected)) {
      throw ModelError("network: CPT of '" + variables_[v].name + "' is not over [variable, parents...]");
    }
    // Each column (fixed parent configuration) must sum to one.
    const std::size_t columns = expected.num_cells() / static_cast<std::size_t>(cards[0]);
    for (std::size_t c = 0; c < columns; ++c) {
      double s = 0.0;
      for (int x = 0; x < cards[0]; ++x) s += cpts_[v][static_cast<std::size_t>(x) * columns + c];
      if (std::abs(s - 1.0) > kCptTolerance) {
        std::ostringstream msg;
        msg << "network: CPT column " << c << " of '" << variables_[v].name << "' sums to " << s << ", not 1";
        throw ModelError(msg.str());
      }
    }
  }
  check_acyclic(variables_, parents_);
}

std::vector<int> BayesianNetwork::cardinalities() const {
  std::vector<int> out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.cardinality());
  return out;
}

Finding Finding::hard(std::string id, VarId variable, int state, int cardinality) {
  Finding f{std::move(id), variable, std::vector<double>(static_cast<std::size_t>(cardinality), 0.0)};
  f.likelihood.at(static_cast<std::size_t>(state)) = 1.0;
  return f;
}

void validate_finding(const Finding& f, std::span<const Variable> vars) {
  if (f.id.empty()) throw EvidenceError("finding: empty id");
  if (f.variable < 0 || static_cast<std::size_t>(f.variable) >= vars.size()) {
    throw EvidenceError("finding '" + f.id + "': unknown variable");
  }
  const auto& var = vars[static_cast<std::size_t>(f.variable)];
  if (f.likelihood.size() != var.states.size()) {
    throw EvidenceError("finding '" + f.id + "': likelihood length does not match variable '" + var.name + "'");
  }
  bool positive = false;
  for (double x : f.likelihood) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw EvidenceError("finding '" + f.id + "': negative or non-finite likelihood");
    positive = positive || x > 0.0;
  }
  if (!positive) throw EvidenceError("finding '" + f.id + "': likelihood is all zero");
}

Potential finding_table(const Finding& f, int cardinality) {
  return Potential(Domain({f.variable}, {cardinality}), std::span<const double>(f.likelihood));
}

void validate_hypothesis(const Hypothesis& h, std::span<const Variable> vars) {
  std::set<VarId> seen;
  for (auto [v, s] : h.assignments) {
    if (v < 0 || static_cast<std::size_t>(v) >= vars.size()) throw EvidenceError("hypothesis: unknown variable");
    if (s < 0 || s >= vars[static_cast<std::size_t>(v)].cardinality()) {
      throw EvidenceError("hypothesis: unknown state for '" + vars[static_cast<std::size_t>(v)].name + "'");
    }
    if (!seen.insert(v).second) {
      throw EvidenceError("hypothesis: variable '" + vars[static_cast<std::size_t>(v)].name + "' assigned twice");
    }
  }
}

Hypothesis parse_hypothesis(std::string_view text, std::span<const Variable> vars) {
  Hypothesis h;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw EvidenceError("hypothesis: expected VAR=state, got '" + std::string(item) + "'");
      const auto name = item.substr(0, eq);
      const auto label = item.substr(eq + 1);
      const int v = find_variable(vars, name);
      if (v < 0) throw EvidenceError("hypothesis: unknown variable '" + std::string(name) + "'");
      const int s = vars[static_cast<std::size_t>(v)].state_index(label);
      if (s < 0) throw EvidenceError("hypothesis: unknown state '" + std::string(label) + "' of '" + std::string(name) + "'");
      h.assignments.emplace_back(v, s);
    }
    start = end + 1;
  }
  validate_hypothesis(h, vars);
  return h;
}

namespace {

json parse_json(std::string_view document) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "syntax error at byte " << e.byte << ": " << e.what();
    throw ModelError(msg.str());
  }
}

template <typename T>
T field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ModelError(std::string(where) + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ModelError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

BayesianNetwork parse_network(std::string_view document) {
  const json doc = parse_json(document);
  if (!doc.is_object()) throw ModelError("model: top level must be an object");
  const json vars_json = field<json>(doc, "variables", "model");
  const json cpds_json = field<json>(doc, "cpds", "model");
  if (!vars_json.is_array() || !cpds_json.is_array()) throw ModelError("model: 'variables' and 'cpds' must be lists");

  std::vector<Variable> vars;
  for (const auto& v : vars_json) {
    vars.push_back({field<std::string>(v, "name", "variable"), field<std::vector<std::string>>(v, "states", "variable")});
  }
  const std::size_t n = vars.size();
  std::vector<std::vector<VarId>> parents(n);
  std::vector<std::optional<Potential>> cpts(n);
  for (const auto& c : cpds_json) {
    const auto name = field<std::string>(c, "variable", "cpd");
    const int v = find_variable(vars, name);
    if (v < 0) throw ModelError("cpd: unknown variable '" + name + "'");
    if (cpts[static_cast<std::size_t>(v)]) throw ModelError("cpd: second CPT for '" + name + "'");
    std::vector<std::string> parent_names;
    if (c.contains("parents")) parent_names = field<std::vector<std::string>>(c, "parents", "cpd");
    std::vector<VarId> family{v};
    std::vector<int> cards{vars[static_cast<std::size_t>(v)].cardinality()};
    for (const auto& pn : parent_names) {
      const int p = find_variable(vars, pn);
      if (p < 0) throw ModelError("cpd of '" + name + "': unknown parent '" + pn + "'");
      parents[static_cast<std::size_t>(v)].push_back(p);
      family.push_back(p);
      cards.push_back(vars[static_cast<std::size_t>(p)].cardinality());
    }
    const auto values = field<std::vector<double>>(c, "values", "cpd");
    Domain dom;
    try {
      dom = Domain(family, cards);
    } catch (const StructuralError&) {
      throw ModelError("cpd of '" + name + "': repeated variable in family");
    }
    if (values.size() != dom.num_cells()) {
      throw ModelError("cpd of '" + name + "': expected " + std::to_string(dom.num_cells()) + " values, got " +
                       std::to_string(values.size()));
    }
    try {
      cpts[static_cast<std::size_t>(v)] = Potential(dom, std::span<const double>(values));
    } catch (const StructuralError& e) {
      throw ModelError("cpd of '" + name + "': " + e.what());
    }
  }
  std::vector<Potential> tables;
  for (std::size_t v = 0; v < n; ++v) {
    if (!cpts[v]) throw ModelError("model: variable '" + vars[v].name + "' has no cpd");
    tables.push_back(std::move(*cpts[v]));
  }
  return BayesianNetwork(std::move(vars), std::move(parents), std::move(tables));
}

std::string serialize_network(const BayesianNetwork& net) {
  json doc;
  doc["variables"] = json::array();
  doc["cpds"] = json::array();
  for (const auto& v : net.variables()) doc["variables"].push_back({{"name", v.name}, {"states", v.states}});
  for (std::size_t v = 0; v < net.size(); ++v) {
    std::vector<std::string> parent_names;
    for (VarId p : net.parents(static_cast<VarId>(v))) parent_names.push_back(net.variables()[static_cast<std::size_t>(p)].name);
    doc["cpds"].push_back({{"variable", net.variables()[v].name},
                           {"parents", parent_names},
                           {"values", net.cpt(static_cast<VarId>(v)).to_vector()}});
  }
  return doc.dump(2);
}

std::vector<Finding> parse_evidence(std::string_view document, std::span<const Variable> vars) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "evidence: syntax error at byte " << e.byte;
    throw EvidenceError(msg.str());
  }
  if (doc.is_object() && doc.contains("findings")) doc = doc["findings"];
  if (!doc.is_array()) throw EvidenceError("evidence: expected a list of findings");
  std::vector<Finding> out;
  std::set<std::string> ids;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("id") || !item.contains("variable")) {
      throw EvidenceError("evidence: each finding needs 'id' and 'variable'");
    }
    Finding f;
    try {
      f.id = item.at("id").get<std::string>();
      const auto name = item.at("variable").get<std::string>();
      f.variable = find_variable(vars, name);
      if (f.variable < 0) throw EvidenceError("evidence: unknown variable '" + name + "'");
      const auto& var = vars[static_cast<std::size_t>(f.variable)];
      if (item.contains("state")) {
        const auto label = item.at("state").get<std::string>();
        const int s = var.state_index(label);
        if (s < 0) throw EvidenceError("evidence: unknown state '" + label + "' of '" + name + "'");
        f = Finding::hard(f.id, f.variable, s, var.cardinality());
      } else if (item.contains("likelihood")) {
        f.likelihood = item.at("likelihood").get<std::vector<double>>();
      } else {
        throw EvidenceError("evidence: finding '" + f.id + "' needs 'state' or 'likelihood'");
      }
    } catch (const json::exception&) {
      throw EvidenceError("evidence: malformed finding");
    }
    validate_finding(f, vars);
    if (!ids.insert(f.id).second) throw EvidenceError("evidence: duplicate finding id '" + f.id + "'");
    out.push_back(std::move(f));
  }
  return out;
}

std::string serialize_evidence(std::span<const Finding> findings, std::span<const Variable> vars) {
  json doc = json::array();
  for (const auto& f : findings) {
    doc.push_back({{"id", f.id}, {"variable", vars[static_cast<std::size_t>(f.variable)].name}, {"likelihood", f.likelihood}});
  }
  return doc.dump(2);
}

}  // namespace cautious
