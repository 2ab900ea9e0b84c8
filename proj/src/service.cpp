#include "cautious/service.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include <httplib.h>

#include "cautious/hugin.hpp"

namespace cautious {

namespace {

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
  int status;
};

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::size_t start = 0;
  while (start < path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

Json error_body(const std::string& message) { return {{"error", message}}; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SensitivityThresholds thresholds_from_json(const Json& j, SensitivityThresholds current) {
  if (j.is_null()) return current;
  try {
    if (j.is_array() && j.size() == 3) {
      current = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    } else if (j.is_object()) {
      current.theta1 = j.value("theta1", current.theta1);
      current.theta2 = j.value("theta2", current.theta2);
      current.theta3 = j.value("theta3", current.theta3);
    } else {
      throw EvidenceError("thresholds: expected [t1, t2, t3] or {theta1, theta2, theta3}");
    }
  } catch (const Json::exception&) {
    throw EvidenceError("thresholds: values must be numbers");
  }
  current.validate();
  return current;
}

}  // namespace

struct SessionService::Session {
  std::string id;
  std::shared_ptr<const JunctionTree> tree;
  CautiousState clean;
  std::optional<Hypothesis> hypothesis;
  std::optional<CautiousState> conditioned;
  double p_h = 1.0;
  SensitivityThresholds thresholds;
  std::uint64_t revision = 0;
  Clock::time_point last_access = Clock::now();
  std::mutex mutex;

  Session(std::string id, std::shared_ptr<const JunctionTree> tree)
      : id(std::move(id)), tree(tree), clean(tree) {}

  const std::vector<Variable>& vars() const { return tree->variables(); }

  std::uint64_t messages_sent() const {
    return clean.counters().messages_sent + (conditioned ? conditioned->counters().messages_sent : 0);
  }

  Json state_summary() const {
    Json out{{"session_id", id}, {"revision", revision}, {"p_evidence", clean.evidence_probability()}};
    Json findings = Json::array();
    for (const auto& m : clean.findings()) findings.push_back(finding_to_json(m.finding, vars()));
    out["findings"] = findings;
    out["marginals"] = marginals_to_json(clean);
    if (hypothesis) {
      out["hypothesis"] = hypothesis_to_json(*hypothesis, vars());
      out["p_h"] = p_h;
      out["p_h_given_e"] = posterior_given_subset(clean, *conditioned, p_h, clean.all_finding_ids());
    }
    return out;
  }
};

SessionService::SessionService(Options options) : options_(std::move(options)) {}
SessionService::~SessionService() = default;

std::size_t SessionService::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

void SessionService::evict_idle(Clock::time_point now) {
  std::lock_guard lock(mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
    if (session_lock.owns_lock() && now - it->second->last_access > options_.idle_timeout) {
      session_lock.unlock();
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError(404, "unknown session '" + id + "'");
  return it->second;
}

ServiceResponse SessionService::create(const Json& body) {
  if (!body.is_object() || !body.contains("model")) throw HttpError(400, "create session: body needs 'model'");
  const Json& model = body["model"];
  std::string document;
  if (model.is_object()) {
    document = model.dump();
  } else if (model.is_string()) {
    const std::string name = model.get<std::string>();
    if (name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
      throw HttpError(400, "model names may not contain path separators");
    }
    std::filesystem::path p = std::filesystem::path(options_.model_dir) / name;
    if (!std::filesystem::exists(p)) p += ".json";
    if (options_.model_dir.empty() || !std::filesystem::exists(p)) throw HttpError(404, "unknown model '" + name + "'");
    document = read_file(p);
  } else {
    throw HttpError(400, "create session: 'model' must be a model document or a model name");
  }
  auto tree = std::make_shared<const JunctionTree>(compile(parse_network(document)));

  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(mutex_);
    const std::string id = "s" + std::to_string(next_id_++);
    session = std::make_shared<Session>(id, tree);
    sessions_.emplace(id, session);
  }
  std::lock_guard lock(session->mutex);
  session->clean.propagate();
  return {201, session->state_summary()};
}

ServiceResponse SessionService::handle(std::string_view method, std::string_view path, std::string_view body_text) {
  try {
    evict_idle(Clock::now());
    Json body;
    if (!body_text.empty()) {
      try {
        body = Json::parse(body_text);
      } catch (const Json::parse_error& e) {
        throw HttpError(400, std::string("malformed request body: ") + e.what());
      }
    }
    const auto parts = split_path(path);
    if (parts.empty() || parts[0] != "sessions") throw HttpError(404, "no such endpoint");
    if (parts.size() == 1) {
      if (method != "POST") throw HttpError(405, "method not allowed");
      return create(body);
    }
    auto session = find(parts[1]);
    std::lock_guard lock(session->mutex);
    session->last_access = Clock::now();
    return dispatch(*session, method, parts, body);
  } catch (const HttpError& e) {
    return {e.status, error_body(e.what())};
  } catch (const ImpossibleEvidence& e) {
    return {409, error_body(e.what())};
  } catch (const NotAccessible& e) {
    return {409, error_body(e.what())};
  } catch (const Error& e) {
    return {400, error_body(e.what())};
  } catch (const std::exception& e) {
    return {500, error_body(e.what())};
  }
}

ServiceResponse SessionService::dispatch(Session& s, std::string_view method, const std::vector<std::string>& parts,
                                         const Json& body) {
  const std::string resource = parts.size() > 2 ? parts[2] : "";
  const auto& vars = s.vars();

  // Rebuilds the states with `mutate` applied to copies; commits only if the
  // new evidence is possible.
  auto repropagate = [&](auto&& mutate) {
    CautiousState clean = s.clean;
    std::optional<CautiousState> conditioned = s.conditioned;
    mutate(clean);
    if (conditioned) mutate(*conditioned);
    const std::uint64_t before = s.messages_sent();
    const double pe = clean.propagate();
    if (pe <= 0.0) throw ImpossibleEvidence("the evidence would have probability zero; change rejected");
    int propagations = 1;
    if (conditioned) {
      conditioned->propagate();
      ++propagations;
    }
    s.clean = std::move(clean);
    s.conditioned = std::move(conditioned);
    ++s.revision;
    Json out = s.state_summary();
    out["cost"] = {{"propagations", propagations}, {"messages_sent", s.messages_sent() - before}};
    return ServiceResponse{200, out};
  };

  if (resource == "findings" && parts.size() == 3 && method == "POST") {
    const Finding f = finding_from_json(body, vars);
    return repropagate([&](CautiousState& st) { st.enter_finding(f); });
  }
  if (resource == "findings" && parts.size() == 4 && method == "DELETE") {
    const std::string fid = parts[3];
    s.clean.finding(fid);  // 400 if unknown
    return repropagate([&](CautiousState& st) { st.retract_finding(fid); });
  }
  if (parts.size() != 3) throw HttpError(404, "no such endpoint");

  if (resource == "marginals" && method == "GET") return {200, s.state_summary()};
  if (resource == "tree" && method == "GET") return {200, tree_to_json(*s.tree)};
  if (resource == "conflict" && method == "GET") {
    Json out = conflict_to_json(conflict(s.clean));
    out["revision"] = s.revision;
    return {200, out};
  }
  if (resource == "subsets" && method == "GET") {
    return {200, {{"revision", s.revision}, {"subsets", subsets_to_json(s.clean)}}};
  }
  if (resource == "hypothesis" && method == "PUT") {
    if (!body.is_object()) throw HttpError(400, "hypothesis: body must be an object");
    const Hypothesis h = hypothesis_from_json(body.contains("assignments") ? body["assignments"] : Json(), vars);
    const auto thresholds = thresholds_from_json(body.contains("thresholds") ? body["thresholds"] : Json(), s.thresholds);
    auto cond = condition_on_hypothesis(s.tree, h);
    CautiousState conditioned(std::make_shared<const JunctionTree>(std::move(cond.conditioned)));
    for (const auto& m : s.clean.findings()) conditioned.enter_finding(m.finding);
    conditioned.propagate();
    s.hypothesis = h;
    s.conditioned = std::move(conditioned);
    s.p_h = cond.p_h;
    s.thresholds = thresholds;
    ++s.revision;
    Json out = s.state_summary();
    out["thresholds"] = {thresholds.theta1, thresholds.theta2, thresholds.theta3};
    return {200, out};
  }
  if (resource == "sensitivity" && method == "GET") {
    if (!s.hypothesis) throw HttpError(409, "set a hypothesis first");
    Json out = sensitivity_to_json(classify_sensitivity(s.clean, *s.conditioned, s.p_h, s.thresholds, *s.hypothesis), vars);
    out["revision"] = s.revision;
    return {200, out};
  }
  if (resource == "whatif" && method == "POST") {
    if (!body.is_object() || !body.contains("finding_id") || !body.contains("replacement")) {
      throw HttpError(400, "what-if: body needs 'finding_id' and 'replacement'");
    }
    const std::string x = body["finding_id"].get<std::string>();
    const auto& original = s.clean.finding(x).finding;
    Json rep = body["replacement"];
    if (rep.is_string()) rep = Json{{"state", rep}};
    if (!rep.is_object()) throw HttpError(400, "what-if: 'replacement' must be an object or a state label");
    if (!rep.contains("id")) rep["id"] = x;
    if (!rep.contains("variable")) rep["variable"] = vars[static_cast<std::size_t>(original.variable)].name;
    const Finding y = finding_from_json(rep, vars);

    const std::uint64_t before = s.messages_sent();
    Json out{{"finding_id", x}, {"replacement", finding_to_json(y, vars)}, {"revision", s.revision}};
    out["p_evidence"] = s.clean.evidence_probability();
    out["p_evidence_swapped"] = s.clean.what_if(x, y);
    if (s.hypothesis) {
      out["p_h_given_e"] = posterior_given_subset(s.clean, *s.conditioned, s.p_h, s.clean.all_finding_ids());
      out["p_h_given_e_swapped"] = what_if_posterior(s.clean, *s.conditioned, s.p_h, x, y);
    }
    out["cost"] = {{"propagations", 0}, {"messages_sent", s.messages_sent() - before}};
    return {200, out};
  }
  throw HttpError(404, "no such endpoint");
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>()) {
  auto route = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  const char* pattern = R"(/sessions.*)";
  impl_->server.Get(pattern, route);
  impl_->server.Post(pattern, route);
  impl_->server.Put(pattern, route);
  impl_->server.Delete(pattern, route);
  impl_->server.Options(pattern, [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::run() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

int serve(SessionService& service, const std::string& host, int port) {
  HttpServer server(service);
  if (server.bind(host, port) < 0) return 1;
  return server.run() ? 0 : 1;
}

}  // namespace cautious
