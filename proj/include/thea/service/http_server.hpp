#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "thea/service/chat_service.hpp"

namespace httplib {
class Server;
}

namespace thea::service {

/// HTTP front end:
///   POST /sessions                  -> 201 {"session_id"}
///   POST /sessions/{id}/messages    -> 200 turn body
///   GET  /sessions/{id}/transcript  -> JSON lines
///   GET  /sessions/{id}/events      -> text/event-stream of turn bodies
class HttpServer {
 public:
  explicit HttpServer(ChatService& service,
                      std::chrono::milliseconds keepalive = std::chrono::seconds(15));
  ~HttpServer();

  /// Binds without serving. Port 0 picks a free port. Returns the bound port
  /// or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  bool listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  ChatService& service_;
  std::chrono::milliseconds keepalive_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace thea::service
