#include <gtest/gtest.h>

#include <thread>

#include "cautious/service.hpp"
#include "support/fixtures.hpp"

// after Eigen: resolv.h defines a _res macro
#include <httplib.h>

using namespace cautious;

namespace {

const std::string kData = CAUTIOUS_DATA_DIR;

class ServiceTest : public ::testing::Test {
 protected:
  SessionService service{SessionService::Options{kData, std::chrono::minutes(30)}};

  ServiceResponse call(std::string_view method, const std::string& path, const Json& body = Json()) {
    return service.handle(method, path, body.is_null() ? "" : body.dump());
  }

  std::string create() {
    const auto r = call("POST", "/sessions", {{"model", "chain3"}});
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return r.body["session_id"].get<std::string>();
  }

  static double marginal_of(const Json& summary, const std::string& var, std::size_t state) {
    for (const auto& m : summary["marginals"]) {
      if (m["variable"] == var) return m["probabilities"][state].get<double>();
    }
    throw std::runtime_error("no marginal for " + var);
  }
};

}  // namespace

TEST_F(ServiceTest, CreateReportsPriors) {
  const auto r = call("POST", "/sessions", {{"model", "chain3"}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["session_id"], "s1");
  EXPECT_NEAR(r.body["p_evidence"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(marginal_of(r.body, "B", 0), 0.48, 1e-12);
  EXPECT_EQ(call("POST", "/sessions", {{"model", "chain3.json"}}).body["session_id"], "s2");
  EXPECT_EQ(service.session_count(), 2u);
}

TEST_F(ServiceTest, CreateFromInlineDocument) {
  const auto r = call("POST", "/sessions", {{"model", Json::parse(cautious::testing::kChain3Document)}});
  ASSERT_EQ(r.status, 201);
  EXPECT_NEAR(marginal_of(r.body, "C", 0), 0.388, 1e-12);
}

TEST_F(ServiceTest, CreateErrors) {
  EXPECT_EQ(call("POST", "/sessions", {{"model", "nope"}}).status, 404);
  EXPECT_EQ(call("POST", "/sessions", {{"model", "../chain3"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions", {{"other", 1}}).status, 400);
  EXPECT_EQ(service.handle("POST", "/sessions", "{not json").status, 400);
  const Json bad = {{"variables", Json::array({{{"name", "A"}, {"states", {"t", "f"}}}})},
                    {"cpds", Json::array({{{"variable", "A"}, {"parents", Json::array()}, {"values", {0.2, 0.2}}}})}};
  EXPECT_EQ(call("POST", "/sessions", {{"model", bad}}).status, 400);
  EXPECT_EQ(call("GET", "/sessions/s99/marginals").status, 404);
}

TEST_F(ServiceTest, AddFindingUpdatesMarginals) {
  const auto id = create();
  const auto r = call("POST", "/sessions/" + id + "/findings", {{"id", "b"}, {"variable", "B"}, {"state", "t"}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_NEAR(r.body["p_evidence"].get<double>(), 0.48, 1e-12);
  EXPECT_NEAR(marginal_of(r.body, "A", 0), 0.75, 1e-12);
  EXPECT_EQ(r.body["cost"]["propagations"], 1);
  EXPECT_EQ(r.body["revision"], 1);
}

TEST_F(ServiceTest, RetractRestoresInitialView) {
  const auto id = create();
  const auto initial = call("GET", "/sessions/" + id + "/marginals").body;
  call("POST", "/sessions/" + id + "/findings", {{"id", "b"}, {"variable", "B"}, {"state", "t"}});
  const auto r = call("DELETE", "/sessions/" + id + "/findings/b");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["marginals"], initial["marginals"]);
  EXPECT_EQ(call("DELETE", "/sessions/" + id + "/findings/b").status, 400);
}

TEST_F(ServiceTest, ContradictionIsRejectedAndStateKept) {
  const auto id = create();
  call("POST", "/sessions/" + id + "/findings", {{"id", "b"}, {"variable", "B"}, {"state", "t"}});
  const auto r = call("POST", "/sessions/" + id + "/findings", {{"id", "b2"}, {"variable", "B"}, {"state", "f"}});
  EXPECT_EQ(r.status, 409);
  const auto now = call("GET", "/sessions/" + id + "/marginals").body;
  EXPECT_NEAR(now["p_evidence"].get<double>(), 0.48, 1e-12);
  EXPECT_EQ(now["findings"].size(), 1u);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/findings", {{"id", "b"}, {"variable", "C"}, {"state", "t"}}).status, 400);
}

TEST_F(ServiceTest, HypothesisSensitivityAndWhatIf) {
  const auto id = create();
  EXPECT_EQ(call("GET", "/sessions/" + id + "/sensitivity").status, 409);
  call("POST", "/sessions/" + id + "/findings", {{"id", "b"}, {"variable", "B"}, {"state", "t"}});
  call("POST", "/sessions/" + id + "/findings", {{"id", "c"}, {"variable", "C"}, {"state", "t"}});
  const auto h = call("PUT", "/sessions/" + id + "/hypothesis", {{"assignments", "A=t"}});
  ASSERT_EQ(h.status, 200) << h.body.dump();
  EXPECT_NEAR(h.body["p_h"].get<double>(), 0.4, 1e-12);
  EXPECT_NEAR(h.body["p_h_given_e"].get<double>(), 0.75, 1e-12);

  const auto sens = call("GET", "/sessions/" + id + "/sensitivity");
  ASSERT_EQ(sens.status, 200);
  EXPECT_EQ(sens.body["subsets"].size(), 4u);
  EXPECT_TRUE(sens.body["crucial_findings"].empty());

  const auto w = call("POST", "/sessions/" + id + "/whatif", {{"finding_id", "c"}, {"replacement", "f"}});
  ASSERT_EQ(w.status, 200) << w.body.dump();
  EXPECT_NEAR(w.body["p_h_given_e_swapped"].get<double>(), 0.75, 1e-12);
  EXPECT_NEAR(w.body["p_evidence_swapped"].get<double>(), 0.144, 1e-12);
  EXPECT_EQ(w.body["cost"]["propagations"], 0);
  EXPECT_EQ(w.body["cost"]["messages_sent"], 0);

  // further findings keep both states in step
  const auto r = call("DELETE", "/sessions/" + id + "/findings/b");
  EXPECT_EQ(r.body["cost"]["propagations"], 2);
  EXPECT_NEAR(r.body["p_h_given_e"].get<double>(), 0.256 / 0.388, 1e-12);
}

TEST_F(ServiceTest, WhatIfWithoutHypothesisAndErrors) {
  const auto id = create();
  call("POST", "/sessions/" + id + "/findings", {{"id", "c"}, {"variable", "C"}, {"state", "t"}});
  const auto w = call("POST", "/sessions/" + id + "/whatif", {{"finding_id", "c"}, {"replacement", {{"likelihood", {0.0, 1.0}}}}});
  ASSERT_EQ(w.status, 200) << w.body.dump();
  EXPECT_NEAR(w.body["p_evidence_swapped"].get<double>(), 0.612, 1e-12);
  EXPECT_FALSE(w.body.contains("p_h_given_e_swapped"));
  EXPECT_EQ(call("POST", "/sessions/" + id + "/whatif", {{"finding_id", "zz"}, {"replacement", "f"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/whatif", {{"finding_id", "c"}}).status, 400);
  EXPECT_EQ(call("PUT", "/sessions/" + id + "/hypothesis", {{"assignments", "A=maybe"}}).status, 400);
}

TEST_F(ServiceTest, ReadOnlyEndpoints) {
  const auto id = create();
  call("POST", "/sessions/" + id + "/findings", {{"id", "b"}, {"variable", "B"}, {"state", "t"}});
  call("POST", "/sessions/" + id + "/findings", {{"id", "c"}, {"variable", "C"}, {"state", "t"}});
  const auto c = call("GET", "/sessions/" + id + "/conflict");
  ASSERT_EQ(c.status, 200);
  EXPECT_NEAR(c.body["conf"].get<double>(), -0.5901, 1e-4);
  EXPECT_EQ(call("GET", "/sessions/" + id + "/subsets").body["subsets"].size(), 4u);
  EXPECT_EQ(call("GET", "/sessions/" + id + "/tree").body["cliques"].size(), 2u);
  EXPECT_EQ(call("GET", "/sessions/" + id + "/bogus").status, 404);
  EXPECT_EQ(call("PATCH", "/sessions/" + id + "/marginals").status, 404);
}

TEST_F(ServiceTest, IdleSessionsAreEvicted) {
  create();
  create();
  service.evict_idle(SessionService::Clock::now());
  EXPECT_EQ(service.session_count(), 2u);
  service.evict_idle(SessionService::Clock::now() + std::chrono::hours(1));
  EXPECT_EQ(service.session_count(), 0u);
}

TEST_F(ServiceTest, ConcurrentSessionsStayIndependent) {
  std::vector<std::thread> workers;
  std::vector<double> results(8);
  for (int i = 0; i < 8; ++i) {
    workers.emplace_back([&, i] {
      const auto r = call("POST", "/sessions", {{"model", "chain3"}});
      const auto id = r.body["session_id"].get<std::string>();
      const auto state = i % 2 ? "t" : "f";
      const auto after = call("POST", "/sessions/" + id + "/findings", {{"id", "b"}, {"variable", "B"}, {"state", state}});
      results[static_cast<std::size_t>(i)] = after.body["p_evidence"].get<double>();
    });
  }
  for (auto& w : workers) w.join();
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(results[static_cast<std::size_t>(i)], i % 2 ? 0.48 : 0.52, 1e-12);
  EXPECT_EQ(service.session_count(), 8u);
}

TEST_F(ServiceTest, HttpRoundTrip) {
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread runner([&] { server.run(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/sessions", R"({"model":"chain3"})", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const auto id = Json::parse(created->body)["session_id"].get<std::string>();
  auto added = client.Post("/sessions/" + id + "/findings", R"({"id":"b","variable":"B","state":"t"})", "application/json");
  ASSERT_TRUE(added);
  EXPECT_EQ(added->status, 200);
  EXPECT_NEAR(marginal_of(Json::parse(added->body), "A", 0), 0.75, 1e-12);
  auto missing = client.Get("/sessions/zzz/marginals");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  server.stop();
  runner.join();
}
