#include "thea/service/http_server.hpp"

#include <charconv>

#include <spdlog/spdlog.h>

#include "httplib.h"

namespace thea::service {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";
// Room for JSON escaping of a maximal message; the text itself is capped by
// kMaxMessageBytes.
constexpr std::size_t kMaxPayloadBytes = 8 * kMaxMessageBytes;

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::string& field = {}) {
  json j = {{"error", message}};
  if (!field.empty()) j["field"] = field;
  res.status = status;
  res.set_content(j.dump(-1, ' ', false, json::error_handler_t::replace), kJson);
}

std::optional<std::size_t> parse_index(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool authorized(const httplib::Request& req, const std::string& token) {
  if (req.get_header_value("Authorization") == "Bearer " + token) return true;
  // EventSource cannot set headers.
  return req.has_param("access_token") && req.get_param_value("access_token") == token;
}

}  // namespace

HttpServer::HttpServer(ChatService& service, std::chrono::milliseconds keepalive)
    : service_(service), keepalive_(keepalive), server_(std::make_unique<httplib::Server>()) {
  server_->set_payload_max_length(kMaxPayloadBytes);
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  service_.shutdown();
  if (server_->is_running()) server_->stop();
}

bool HttpServer::running() const { return server_->is_running(); }

void HttpServer::install_routes() {
  auto& svr = *server_;

  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Authorization, Content-Type, Last-Event-ID"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});

  svr.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (req.method == "OPTIONS") {
      res.status = 204;
      return httplib::Server::HandlerResponse::Handled;
    }
    const auto& token = service_.config().auth_token;
    if (token && !authorized(req, *token)) {
      send_error(res, 401, "missing or invalid bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 413) {
      send_error(res, 413, "payload too large");
    } else if (res.status == 404) {
      send_error(res, 404, "not found");
    } else {
      send_error(res, res.status, "request failed");
    }
  });

  svr.set_exception_handler(
      [](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
        try {
          if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          spdlog::error("{} {}: {}", req.method, req.path, e.what());
        } catch (...) {
          spdlog::error("{} {}: unknown exception", req.method, req.path);
        }
        send_error(res, 500, "internal error");
      });

  svr.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::object();
    if (!req.body.empty()) {
      body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        return send_error(res, 400, "body must be a JSON object");
      }
    }
    json persona = json::object();
    for (const auto& [key, v] : body.items()) {
      if (key != "persona") return send_error(res, 400, "unknown field \"" + key + "\"");
      persona = v;
    }
    try {
      const auto id = service_.create_session(persona);
      res.status = 201;
      res.set_content(json{{"session_id", id}}.dump(), kJson);
    } catch (const persona::PersonaError& e) {
      send_error(res, 422, e.what(), e.field());
    }
  });

  svr.Post(R"(/sessions/([A-Za-z0-9]+)/messages)",
           [this](const httplib::Request& req, httplib::Response& res) {
             if (req.body.empty()) return send_error(res, 400, "empty body");
             const json body = json::parse(req.body, nullptr, false);
             if (body.is_discarded() || !body.is_object()) {
               return send_error(res, 400, "body must be a JSON object");
             }
             auto it = body.find("text");
             if (it == body.end() || !it->is_string()) {
               return send_error(res, 400, "\"text\" must be a string");
             }
             try {
               auto turn = service_.post_message(req.matches[1].str(), it->get<std::string>());
               res.set_content(turn.body, kJson);
             } catch (const SessionNotFound& e) {
               send_error(res, 404, e.what());
             } catch (const InvalidMessage& e) {
               send_error(res, 400, e.what());
             } catch (const MessageTooLarge& e) {
               send_error(res, 413, e.what());
             }
           });

  svr.Get(R"(/sessions/([A-Za-z0-9]+)/transcript)",
          [this](const httplib::Request& req, httplib::Response& res) {
            try {
              res.set_content(service_.transcript_ndjson(req.matches[1].str()),
                              "application/x-ndjson");
            } catch (const SessionNotFound& e) {
              send_error(res, 404, e.what());
            }
          });

  svr.Get(R"(/sessions/([A-Za-z0-9]+)/events)",
          [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1].str();
            std::optional<std::size_t> last;
            std::string resume = req.get_header_value("Last-Event-ID");
            if (resume.empty() && req.has_param("last_event_id")) {
              resume = req.get_param_value("last_event_id");
            }
            if (!resume.empty()) {
              last = parse_index(resume);
              if (!last) return send_error(res, 400, "bad Last-Event-ID");
            }
            try {
              service_.session_seed(id);  // existence check before streaming
            } catch (const SessionNotFound& e) {
              return send_error(res, 404, e.what());
            }
            res.set_header("Cache-Control", "no-cache");
            auto cursor = std::make_shared<std::optional<std::size_t>>(last);
            res.set_chunked_content_provider(
                "text/event-stream",
                [this, id, cursor](std::size_t, httplib::DataSink& sink) {
                  if (service_.stopping()) {
                    sink.done();
                    return true;
                  }
                  std::vector<TurnEvent> events;
                  try {
                    events = service_.events_after(id, *cursor, keepalive_);
                  } catch (const SessionNotFound&) {
                    return false;
                  }
                  std::string chunk;
                  for (const auto& e : events) {
                    chunk += "id: " + std::to_string(e.id) + "\nevent: turn\ndata: " + e.data +
                             "\n\n";
                    *cursor = e.id;
                  }
                  if (chunk.empty()) chunk = ": keepalive\n\n";
                  return sink.write(chunk.data(), chunk.size());
                });
          });
}

}  // namespace thea::service
