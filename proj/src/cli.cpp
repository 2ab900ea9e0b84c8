#include "cautious/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cautious/analysis.hpp"
#include "cautious/hugin.hpp"
#include "cautious/report_json.hpp"
#include "cautious/service.hpp"

namespace cautious {

namespace {

constexpr const char* kModelDirEnv = "CAUTIOUS_MODEL_DIR";

class InputError : public Error {
 public:
  using Error::Error;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A path as given, or a name looked up in $CAUTIOUS_MODEL_DIR (with or
// without the .json suffix).
std::filesystem::path resolve_model(const std::string& text) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(text)) return text;
  if (const char* dir = std::getenv(kModelDirEnv)) {
    for (const fs::path& candidate : {fs::path(dir) / text, fs::path(dir) / (text + ".json")}) {
      if (fs::is_regular_file(candidate)) return candidate;
    }
  }
  throw InputError("model '" + text + "' not found (looked in the working directory and $" + kModelDirEnv + ")");
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(6) << x;
  return ss.str();
}

std::string join(const FindingSet& ids) {
  std::string s = "{";
  for (const auto& id : ids) s += (s.size() > 1 ? "," : "") + id;
  return s + "}";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("expected a comma-separated list of numbers, got '" + text + "'");
    }
  }
  return out;
}

struct Options {
  std::string model;
  std::string evidence;
  std::vector<std::string> marginals;
  std::string hypothesis;
  std::string thresholds;
  std::string finding;
  std::string state;
  std::string likelihood;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_dir;
  bool table = false;
};

struct Loaded {
  std::shared_ptr<const JunctionTree> tree;
  CautiousState state;
};

Loaded load(const Options& o) {
  BayesianNetwork net;
  try {
    net = parse_network(slurp(resolve_model(o.model)));
  } catch (const InputError& e) {
    throw ModelError(e.what());
  }
  auto tree = std::make_shared<const JunctionTree>(compile(net));
  CautiousState state(tree);
  if (!o.evidence.empty()) {
    std::string doc;
    try {
      doc = slurp(o.evidence);
    } catch (const InputError& e) {
      throw EvidenceError(e.what());
    }
    for (const auto& f : parse_evidence(doc, tree->variables())) state.enter_finding(f);
  }
  state.propagate();
  return {tree, std::move(state)};
}

void require_possible(const CautiousState& state) {
  if (state.evidence_probability() <= 0.0) throw ImpossibleEvidence("the evidence has probability zero");
}

SensitivityThresholds parse_thresholds(const std::string& text) {
  SensitivityThresholds t;
  if (text.empty()) return t;
  const auto v = parse_list(text);
  if (v.size() != 3) throw CLI::ValidationError("--thresholds expects t1,t2,t3");
  t = {v[0], v[1], v[2]};
  t.validate();
  return t;
}

void emit(std::ostream& out, const Json& doc) { out << doc.dump(2) << "\n"; }

int cmd_compile(const Options& o, std::ostream& out) {
  auto loaded = load(o);
  const auto& jt = *loaded.tree;
  if (!o.table) {
    emit(out, tree_to_json(jt));
    return kExitOk;
  }
  out << "root: " << jt.root() << "\n";
  for (const auto& c : jt.cliques()) {
    out << "clique " << c.index << ":";
    for (VarId v : c.domain.vars()) out << " " << jt.variables()[static_cast<std::size_t>(v)].name;
    out << "\n";
  }
  for (const auto& s : jt.separators()) {
    out << "separator " << s.index << " (" << s.parent << " - " << s.child << "):";
    for (VarId v : s.domain.vars()) out << " " << jt.variables()[static_cast<std::size_t>(v)].name;
    out << "\n";
  }
  return kExitOk;
}

int cmd_query(const Options& o, std::ostream& out) {
  auto loaded = load(o);
  const auto& state = loaded.state;
  require_possible(state);
  std::vector<VarId> vars;
  if (o.marginals.empty()) {
    for (std::size_t i = 0; i < state.tree().variables().size(); ++i) vars.push_back(static_cast<VarId>(i));
  } else {
    for (const auto& name : o.marginals) {
      const int v = find_variable(state.tree().variables(), name);
      if (v < 0) throw EvidenceError("unknown variable '" + name + "'");
      vars.push_back(v);
    }
  }
  if (!o.table) {
    emit(out, {{"p_evidence", state.evidence_probability()}, {"marginals", marginals_to_json(state, vars)}});
    return kExitOk;
  }
  out << "P(e) = " << fmt(state.evidence_probability()) << "\n";
  for (VarId v : vars) {
    const auto& var = state.tree().variables()[static_cast<std::size_t>(v)];
    const auto p = state.marginal(v);
    out << var.name << ":";
    for (std::size_t i = 0; i < p.size(); ++i) out << "  " << var.states[i] << "=" << fmt(p[i]);
    out << "\n";
  }
  return kExitOk;
}

int cmd_subsets(const Options& o, std::ostream& out) {
  auto loaded = load(o);
  const auto& state = loaded.state;
  if (!o.table) {
    emit(out, {{"p_evidence", state.evidence_probability()}, {"subsets", subsets_to_json(state)}});
    return kExitOk;
  }
  for (const auto& a : state.accessible_subsets()) {
    out << std::left << std::setw(40) << join(a.findings) << " " << fmt(state.subset_probability(a.findings))
        << "  (clique " << a.recipe.clique << ")\n";
  }
  return kExitOk;
}

int cmd_conflict(const Options& o, std::ostream& out) {
  auto loaded = load(o);
  require_possible(loaded.state);
  const auto report = conflict(loaded.state);
  if (!o.table) {
    emit(out, conflict_to_json(report));
    return kExitOk;
  }
  out << "conf(e) = " << fmt(report.conf_value) << "   P(e) = " << fmt(report.p_evidence) << "\n";
  for (const auto& [id, p] : report.finding_probabilities) out << "  P(" << id << ") = " << fmt(p) << "\n";
  for (const auto& part : report.partitions) {
    out << "  separator " << part.separator << ": " << join(part.e_left) << " | " << join(part.e_right) << "  "
        << fmt(part.value) << "\n";
  }
  return kExitOk;
}

struct HypothesisPair {
  double p_h = 1.0;
  Hypothesis h;
  std::optional<CautiousState> conditioned;
};

HypothesisPair condition(const Loaded& loaded, const std::string& text) {
  HypothesisPair out;
  out.h = parse_hypothesis(text, loaded.tree->variables());
  auto cond = condition_on_hypothesis(loaded.tree, out.h);
  out.p_h = cond.p_h;
  out.conditioned.emplace(std::make_shared<const JunctionTree>(std::move(cond.conditioned)));
  for (const auto& m : loaded.state.findings()) out.conditioned->enter_finding(m.finding);
  out.conditioned->propagate();
  return out;
}

int cmd_sensitivity(const Options& o, std::ostream& out) {
  const auto thresholds = parse_thresholds(o.thresholds);
  auto loaded = load(o);
  require_possible(loaded.state);
  auto hyp = condition(loaded, o.hypothesis);
  const auto report = classify_sensitivity(loaded.state, *hyp.conditioned, hyp.p_h, thresholds, hyp.h);
  if (!o.table) {
    emit(out, sensitivity_to_json(report, loaded.tree->variables()));
    return kExitOk;
  }
  out << "P(h) = " << fmt(report.p_h) << "   P(h|e) = " << fmt(report.p_h_given_e) << "\n";
  out << std::left << std::setw(32) << "subset" << std::setw(11) << "P(h|e')" << std::setw(11) << "ratio"
      << "flags\n";
  for (const auto& row : report.subsets) {
    std::string flags;
    if (row.important.value_or(false)) flags += "important ";
    if (row.sufficient) flags += "sufficient ";
    if (row.minimal_sufficient) flags += "minimal ";
    if (row.crucial) flags += "crucial ";
    if (row.decisive) flags += "decisive ";
    out << std::left << std::setw(32) << join(row.findings) << std::setw(11) << fmt(row.p_h_given_e_prime)
        << std::setw(11) << fmt(row.sufficiency_ratio) << flags << "\n";
  }
  out << "crucial findings: " << join(report.crucial_findings) << "\n";
  return kExitOk;
}

int cmd_whatif(const Options& o, std::ostream& out) {
  auto loaded = load(o);
  require_possible(loaded.state);
  const auto& vars = loaded.tree->variables();
  const auto& original = loaded.state.finding(o.finding).finding;
  const auto& var = vars[static_cast<std::size_t>(original.variable)];
  Finding y{o.finding, original.variable, {}};
  if (!o.state.empty()) {
    const int s = var.state_index(o.state);
    if (s < 0) throw EvidenceError("unknown state '" + o.state + "' of '" + var.name + "'");
    y = Finding::hard(o.finding, original.variable, s, var.cardinality());
  } else {
    y.likelihood = parse_list(o.likelihood);
  }
  const auto sent_before = loaded.state.counters().messages_sent;
  Json doc{{"finding_id", o.finding}, {"replacement", finding_to_json(y, vars)}};
  doc["p_evidence"] = loaded.state.evidence_probability();
  doc["p_evidence_swapped"] = loaded.state.what_if(o.finding, y);
  if (!o.hypothesis.empty()) {
    auto hyp = condition(loaded, o.hypothesis);
    const auto cond_before = hyp.conditioned->counters().messages_sent;
    doc["p_h_given_e"] = posterior_given_subset(loaded.state, *hyp.conditioned, hyp.p_h, loaded.state.all_finding_ids());
    doc["p_h_given_e_swapped"] = what_if_posterior(loaded.state, *hyp.conditioned, hyp.p_h, o.finding, y);
    doc["messages_sent_delta"] = (loaded.state.counters().messages_sent - sent_before) +
                                 (hyp.conditioned->counters().messages_sent - cond_before);
  } else {
    doc["messages_sent_delta"] = loaded.state.counters().messages_sent - sent_before;
  }
  if (!o.table) {
    emit(out, doc);
    return kExitOk;
  }
  out << "P(e) = " << fmt(doc["p_evidence"].get<double>()) << "   P(e swapped) = "
      << fmt(doc["p_evidence_swapped"].get<double>()) << "\n";
  if (doc.contains("p_h_given_e")) {
    out << "P(h|e) = " << fmt(doc["p_h_given_e"].get<double>()) << "   P(h|e swapped) = "
        << fmt(doc["p_h_given_e_swapped"].get<double>()) << "\n";
  }
  out << "messages sent: " << doc["messages_sent_delta"].get<std::uint64_t>() << "\n";
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& err) {
  SessionService::Options so;
  so.model_dir = o.model_dir;
  if (so.model_dir.empty()) {
    if (const char* dir = std::getenv(kModelDirEnv)) so.model_dir = dir;
  }
  SessionService service(so);
  err << "serving on " << o.host << ":" << o.port << "\n";
  return serve(service, o.host, o.port) == 0 ? kExitOk : kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cautious propagation on discrete Bayesian networks", "cautious"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_model = [&](CLI::App* cmd, bool evidence) {
    cmd->add_option("--model", o.model, "Model document (path, or name in $CAUTIOUS_MODEL_DIR)")->required();
    if (evidence) cmd->add_option("--evidence", o.evidence, "Evidence document");
    cmd->add_flag("--table", o.table, "Render aligned text instead of JSON");
  };

  auto* compile_cmd = app.add_subcommand("compile", "Build and report the junction tree");
  add_model(compile_cmd, false);
  auto* query_cmd = app.add_subcommand("query", "Posterior marginals and P(e)");
  add_model(query_cmd, true);
  query_cmd->add_option("--marginal", o.marginals, "Variable to report (repeatable; default all)");
  auto* subsets_cmd = app.add_subcommand("subsets", "Accessible evidence subsets and their probabilities");
  add_model(subsets_cmd, true);
  auto* conflict_cmd = app.add_subcommand("conflict", "Conflict measure of the evidence");
  add_model(conflict_cmd, true);
  auto* sens_cmd = app.add_subcommand("sensitivity", "Sensitivity of a hypothesis to the evidence");
  add_model(sens_cmd, true);
  sens_cmd->add_option("--hypothesis", o.hypothesis, "VAR=state[,VAR=state...]")->required();
  sens_cmd->add_option("--thresholds", o.thresholds, "t1,t2,t3 (default 0.2,0.2,0.2)");
  auto* whatif_cmd = app.add_subcommand("whatif", "Replace one finding without repropagating");
  add_model(whatif_cmd, true);
  whatif_cmd->add_option("--finding", o.finding, "Id of the finding to replace")->required();
  auto* st = whatif_cmd->add_option("--state", o.state, "Replacement state (hard finding)");
  auto* lk = whatif_cmd->add_option("--likelihood", o.likelihood, "Replacement likelihood l1,l2,...");
  st->excludes(lk);
  whatif_cmd->add_option("--hypothesis", o.hypothesis, "Also report P(h | swapped evidence)");
  auto* serve_cmd = app.add_subcommand("serve", "Run the session service over HTTP");
  serve_cmd->add_option("--host", o.host, "Bind address");
  serve_cmd->add_option("--port", o.port, "Port");
  serve_cmd->add_option("--model-dir", o.model_dir, "Directory of named models (default $CAUTIOUS_MODEL_DIR)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (whatif_cmd->parsed() && o.state.empty() && o.likelihood.empty()) {
      throw CLI::ValidationError("whatif needs --state or --likelihood");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (compile_cmd->parsed()) return cmd_compile(o, out);
    if (query_cmd->parsed()) return cmd_query(o, out);
    if (subsets_cmd->parsed()) return cmd_subsets(o, out);
    if (conflict_cmd->parsed()) return cmd_conflict(o, out);
    if (sens_cmd->parsed()) return cmd_sensitivity(o, out);
    if (whatif_cmd->parsed()) return cmd_whatif(o, out);
    if (serve_cmd->parsed()) return cmd_serve(o, err);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return kExitModel;
  } catch (const ImpossibleEvidence& e) {
    err << "impossible: " << e.what() << "\n";
    return kExitImpossible;
  } catch (const Error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitModel;
  }
  return kExitUsage;
}

}  // namespace cautious
