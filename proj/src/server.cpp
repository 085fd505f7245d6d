#include "fishmonger/server.hpp"

#include <httplib.h>

namespace fishmonger {

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump(), kJson);
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    res.set_content(fn().dump(), kJson);
    res.status = 200;
  } catch (const ServiceError& e) {
    send_error(res, e.status(), e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto body = nlohmann::json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw ServiceError(400, "bad_request", "request body must be a JSON object");
  }
  return body;
}

}  // namespace

PlayServer::PlayServer(SessionStore& store)
    : store_(store), http_(std::make_unique<httplib::Server>()) {
  auto& srv = *http_;

  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const nlohmann::json body = parse_body(req);
      if (!body.contains("curve")) {
        throw ServiceError(400, "invalid_curve", "request is missing field 'curve'");
      }
      std::optional<std::uint64_t> seed;
      std::optional<std::size_t> cap;
      if (body.contains("seed") && !body["seed"].is_null()) seed = body["seed"].get<std::uint64_t>();
      if (body.contains("round_cap") && !body["round_cap"].is_null()) {
        cap = body["round_cap"].get<std::size_t>();
      }
      return store_.create_session(body["curve"], seed, cap);
    });
  });

  srv.Get(R"(/sessions/([0-9a-f]+)/offer)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return store_.get_offer(req.matches[1]); });
  });

  srv.Post(R"(/sessions/([0-9a-f]+)/decision)",
           [this](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               const nlohmann::json body = parse_body(req);
               if (!body.contains("accept") || !body["accept"].is_boolean()) {
                 throw ServiceError(400, "bad_request", "field 'accept' must be a boolean");
               }
               const std::string token =
                   body.contains("token") && body["token"].is_string() ? body["token"].get<std::string>() : "";
               return store_.post_decision(req.matches[1], body["accept"].get<bool>(), token);
             });
           });

  srv.Post(R"(/sessions/([0-9a-f]+)/finish)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return store_.finish(req.matches[1]); });
  });

  srv.Get(R"(/sessions/([0-9a-f]+)/audit)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return store_.audit(req.matches[1]); });
  });

  srv.Get(R"(/sessions/([0-9a-f]+)/history)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return store_.history(req.matches[1]); });
  });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, "not_found", "no such endpoint");
  });
}

PlayServer::~PlayServer() = default;

int PlayServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

bool PlayServer::listen_after_bind() { return http_->listen_after_bind(); }

void PlayServer::stop() { http_->stop(); }

bool PlayServer::is_running() const { return http_->is_running(); }

void PlayServer::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace fishmonger
