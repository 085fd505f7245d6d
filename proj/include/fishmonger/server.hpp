#pragma once

// HTTP+JSON front end for SessionStore.
//
//   POST /sessions                    {"curve": {...}, "seed"?: n, "round_cap"?: n}
//   GET  /sessions/{id}/offer
//   POST /sessions/{id}/decision      {"accept": bool, "token": "..."}
//   POST /sessions/{id}/finish
//   GET  /sessions/{id}/audit
//   GET  /sessions/{id}/history
//
// Errors are {"error": {"code": "...", "message": "..."}}.

#include <memory>
#include <string>

#include "fishmonger/session.hpp"

namespace httplib {
class Server;
}

namespace fishmonger {

class PlayServer {
 public:
  explicit PlayServer(SessionStore& store);
  ~PlayServer();

  PlayServer(const PlayServer&) = delete;
  PlayServer& operator=(const PlayServer&) = delete;

  // Binds to an OS-chosen port when port == 0; returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

 private:
  SessionStore& store_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace fishmonger
