#pragma once

// Structured (JSON) documents for trees, marginals, subset families and
// analysis reports. Field order is fixed so output is byte-stable.

#include <span>

#include <nlohmann/json.hpp>

#include "cautious/analysis.hpp"
#include "cautious/cautious.hpp"
#include "cautious/hugin.hpp"
#include "cautious/junction_tree.hpp"

namespace cautious {

using Json = nlohmann::ordered_json;

Json tree_to_json(const JunctionTree& jt);
Json marginals_to_json(const CautiousState& state);
Json marginals_to_json(const CautiousState& state, std::span<const VarId> vars);
Json subsets_to_json(const CautiousState& state);
Json conflict_to_json(const ConflictReport& report);
Json sensitivity_to_json(const SensitivityReport& report, std::span<const Variable> vars);
Json hypothesis_to_json(const Hypothesis& h, std::span<const Variable> vars);
Json finding_to_json(const Finding& f, std::span<const Variable> vars);
Json counters_to_json(const OpCounters& c);

/// One finding object: {id, variable, state} or {id, variable, likelihood}.
Finding finding_from_json(const Json& j, std::span<const Variable> vars);
/// {"A": "t", ...} or [{"variable": "A", "state": "t"}, ...] or "A=t,B=f".
Hypothesis hypothesis_from_json(const Json& j, std::span<const Variable> vars);

}  // namespace cautious
