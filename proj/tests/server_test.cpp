#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "fishmonger/server.hpp"
#include "fishmonger/session.hpp"

using namespace fishmonger;
using nlohmann::json;

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<PlayServer>(store_);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  std::pair<int, json> post(const std::string& path, const json& body) {
    auto res = client_->Post(path, body.dump(), "application/json");
    if (!res) return {0, {}};
    return {res->status, json::parse(res->body)};
  }

  std::pair<int, json> get(const std::string& path) {
    auto res = client_->Get(path);
    if (!res) return {0, {}};
    return {res->status, json::parse(res->body)};
  }

  SessionStore store_;
  std::unique_ptr<PlayServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ServerTest, FullSessionOverHttp) {
  auto [status, created] = post("/sessions", {{"curve", {{"family", "rational"}}}, {"seed", 42}, {"round_cap", 5}});
  ASSERT_EQ(status, 200) << created.dump();
  const std::string base = "/sessions/" + created["session_id"].get<std::string>();
  EXPECT_TRUE(created["commitment"]["seed_chosen_by_client"].get<bool>());

  auto [s_offer, offer] = get(base + "/offer");
  EXPECT_EQ(s_offer, 200);
  EXPECT_EQ(offer["price"], created["offer"]["price"]);
  EXPECT_FALSE(offer.contains("branch"));

  auto [s_audit, early] = get(base + "/audit");
  EXPECT_EQ(s_audit, 403);
  EXPECT_EQ(early["error"]["code"], "forbidden");

  for (int i = 0; i < 5; ++i) {
    auto [s, r] = post(base + "/decision", {{"accept", i % 2 == 0}, {"token", "k" + std::to_string(i)}});
    ASSERT_EQ(s, 200) << r.dump();
  }
  auto [s_done, done] = get(base + "/offer");
  EXPECT_EQ(s_done, 409);
  EXPECT_EQ(done["error"]["code"], "session_finished");

  auto [s_fin, fin] = post(base + "/finish", json::object());
  EXPECT_EQ(s_fin, 200);
  EXPECT_EQ(fin["seed"], 42);
  auto [s_a, audit] = get(base + "/audit");
  EXPECT_EQ(s_a, 200);
  EXPECT_TRUE(audit["replay_matches"].get<bool>());
  EXPECT_EQ(audit["credibility"]["verdict"], "insufficient sample");
  auto [s_h, history] = get(base + "/history");
  EXPECT_EQ(s_h, 200);
  EXPECT_EQ(history["rounds"].size(), 5u);
  EXPECT_TRUE(history["rounds"][0].contains("branch"));
}

TEST_F(ServerTest, ErrorBodiesCarryCodes) {
  auto [s1, e1] = post("/sessions", {{"curve", {{"family", "nonsense"}}}});
  EXPECT_EQ(s1, 400);
  EXPECT_EQ(e1["error"]["code"], "invalid_curve");

  auto [s2, e2] = get("/sessions/0123abcd/offer");
  EXPECT_EQ(s2, 404);
  EXPECT_EQ(e2["error"]["code"], "not_found");

  auto [s3, created] = post("/sessions", {{"curve", {{"family", "exponential"}, {"rate", 2.0}}}});
  ASSERT_EQ(s3, 200);
  const std::string base = "/sessions/" + created["session_id"].get<std::string>();
  auto [s4, e4] = post(base + "/decision", {{"accept", true}});
  EXPECT_EQ(s4, 409);
  EXPECT_EQ(e4["error"]["code"], "token_required");
  auto [s5, e5] = post(base + "/decision", {{"accept", "yes"}, {"token", "x"}});
  EXPECT_EQ(s5, 400);
  auto res = client_->Post(base + "/decision", "not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  auto [s6, first] = post(base + "/decision", {{"accept", false}, {"token", "dup"}});
  auto [s7, again] = post(base + "/decision", {{"accept", false}, {"token", "dup"}});
  EXPECT_EQ(s6, 200);
  EXPECT_EQ(s7, 200);
  EXPECT_EQ(first, again);
}
