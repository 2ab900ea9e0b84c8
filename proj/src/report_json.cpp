#include "cautious/report_json.hpp"

namespace cautious {

namespace {

Json ids(const FindingSet& s) {
  Json out = Json::array();
  for (const auto& id : s) out.push_back(id);
  return out;
}

Json var_names(const Domain& d, std::span<const Variable> vars) {
  Json out = Json::array();
  for (VarId v : d.vars()) out.push_back(vars[static_cast<std::size_t>(v)].name);
  return out;
}

}  // namespace

Json tree_to_json(const JunctionTree& jt) {
  Json cliques = Json::array();
  for (const auto& c : jt.cliques()) {
    Json fam = Json::array();
    for (VarId v : c.family_of) fam.push_back(jt.variables()[static_cast<std::size_t>(v)].name);
    cliques.push_back({{"index", c.index}, {"variables", var_names(c.domain, jt.variables())}, {"family_of", fam}});
  }
  Json seps = Json::array();
  for (const auto& s : jt.separators()) {
    seps.push_back({{"index", s.index},
                    {"parent", s.parent},
                    {"child", s.child},
                    {"variables", var_names(s.domain, jt.variables())}});
  }
  return {{"root", jt.root()}, {"calibrated", jt.calibrated()}, {"cliques", cliques}, {"separators", seps}};
}

Json marginals_to_json(const CautiousState& state, std::span<const VarId> vars) {
  const auto& all = state.tree().variables();
  Json out = Json::array();
  for (VarId v : vars) {
    const auto& var = all.at(static_cast<std::size_t>(v));
    out.push_back({{"variable", var.name}, {"states", var.states}, {"probabilities", state.marginal(v)}});
  }
  return out;
}

Json marginals_to_json(const CautiousState& state) {
  std::vector<VarId> vars(state.tree().variables().size());
  for (std::size_t i = 0; i < vars.size(); ++i) vars[i] = static_cast<VarId>(i);
  return marginals_to_json(state, vars);
}

Json subsets_to_json(const CautiousState& state) {
  Json out = Json::array();
  for (const auto& a : state.accessible_subsets()) {
    Json seps = Json::array();
    for (int s : a.recipe.separators) seps.push_back(s);
    out.push_back({{"findings", ids(a.findings)},
                   {"probability", state.subset_probability(a.findings)},
                   {"recipe", {{"clique", a.recipe.clique}, {"separators", seps}, {"local_findings", a.recipe.findings}}}});
  }
  return out;
}

Json conflict_to_json(const ConflictReport& r) {
  Json probs = Json::object();
  for (const auto& [id, p] : r.finding_probabilities) probs[id] = p;
  Json parts = Json::array();
  for (const auto& p : r.partitions) {
    parts.push_back({{"separator", p.separator}, {"e_left", ids(p.e_left)}, {"e_right", ids(p.e_right)}, {"conflict", p.value}});
  }
  return {{"conf", r.conf_value}, {"p_evidence", r.p_evidence}, {"finding_probabilities", probs}, {"partitions", parts}};
}

Json hypothesis_to_json(const Hypothesis& h, std::span<const Variable> vars) {
  Json out = Json::array();
  for (auto [v, s] : h.assignments) {
    const auto& var = vars[static_cast<std::size_t>(v)];
    out.push_back({{"variable", var.name}, {"state", var.states[static_cast<std::size_t>(s)]}});
  }
  return out;
}

Json sensitivity_to_json(const SensitivityReport& r, std::span<const Variable> vars) {
  Json rows = Json::array();
  for (const auto& s : r.subsets) {
    Json row{{"findings", ids(s.findings)},
             {"p_e_prime", s.p_e_prime},
             {"p_e_prime_given_h", s.p_e_prime_given_h},
             {"p_h_given_e_prime", s.p_h_given_e_prime},
             {"sufficiency_ratio", s.sufficiency_ratio}};
    row["importance_ratio"] = s.importance_ratio ? Json(*s.importance_ratio) : Json(nullptr);
    row["important"] = s.important ? Json(*s.important) : Json("not-evaluable");
    row["sufficient"] = s.sufficient;
    row["minimal_sufficient"] = s.minimal_sufficient;
    row["crucial"] = s.crucial;
    row["decisive"] = s.decisive;
    rows.push_back(std::move(row));
  }
  return {{"hypothesis", hypothesis_to_json(r.hypothesis, vars)},
          {"thresholds", {r.thresholds.theta1, r.thresholds.theta2, r.thresholds.theta3}},
          {"p_h", r.p_h},
          {"p_h_given_e", r.p_h_given_e},
          {"subsets", rows},
          {"crucial_findings", ids(r.crucial_findings)}};
}

Json finding_to_json(const Finding& f, std::span<const Variable> vars) {
  return {{"id", f.id}, {"variable", vars[static_cast<std::size_t>(f.variable)].name}, {"likelihood", f.likelihood}};
}

Json counters_to_json(const OpCounters& c) {
  return {{"multiplications", c.multiplications},
          {"divisions", c.divisions},
          {"marginalizations", c.marginalizations},
          {"messages_sent", c.messages_sent},
          {"message_multiplications", c.message_multiplications}};
}

Finding finding_from_json(const Json& j, std::span<const Variable> vars) {
  auto findings = parse_evidence(Json::array({j}).dump(), vars);
  return std::move(findings.front());
}

Hypothesis hypothesis_from_json(const Json& j, std::span<const Variable> vars) {
  if (j.is_string()) return parse_hypothesis(j.get<std::string>(), vars);
  std::string text;
  auto add = [&](const std::string& var, const std::string& state) {
    text += (text.empty() ? "" : ",") + var + "=" + state;
  };
  try {
    if (j.is_object()) {
      for (const auto& [k, v] : j.items()) add(k, v.get<std::string>());
    } else if (j.is_array()) {
      for (const auto& item : j) add(item.at("variable").get<std::string>(), item.at("state").get<std::string>());
    } else if (!j.is_null()) {
      throw EvidenceError("hypothesis: unsupported document shape");
    }
  } catch (const Json::exception&) {
    throw EvidenceError("hypothesis: malformed assignment list");
  }
  return parse_hypothesis(text, vars);
}

}  // namespace cautious
