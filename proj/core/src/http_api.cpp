#include "babble/http_api.hpp"

#include <stop_token>
#include <thread>

#include <httplib.h>

#include "babble/errors.hpp"

namespace babble {
namespace {

using json = nlohmann::json;

constexpr auto kJson = "application/json";
constexpr auto kKeepAlive = std::chrono::seconds(15);

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  res.status = status;
  res.set_content(ordered_json{{"error", {{"code", code}, {"message", message}}}}.dump(), kJson);
}

// Runs a handler and translates failures into the error envelope.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), code_name(e.code()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

std::size_t last_event_of(const httplib::Request& req) {
  std::string raw;
  if (req.has_param("last_event")) {
    raw = req.get_param_value("last_event");
  } else if (req.has_header("Last-Event-ID")) {
    raw = req.get_header_value("Last-Event-ID");
  }
  if (raw.empty()) return 0;
  try {
    return std::stoul(raw);
  } catch (const std::exception&) {
    throw Error(ErrorCode::IndexOutOfRange, "last event index '" + raw + "' is not a number");
  }
}

std::string sse_frame(const ordered_json& event) {
  return "id: " + std::to_string(event["index"].get<std::size_t>()) + "\nevent: " +
         event["type"].get<std::string>() + "\ndata: " + event.dump() + "\n\n";
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::WrongPhase:
    case ErrorCode::NotTerminated:
    case ErrorCode::DuplicateSurvey:
    case ErrorCode::UnexpectedInput:
    case ErrorCode::SessionTerminated: return 409;
    case ErrorCode::InvalidConfig:
    case ErrorCode::ConfigInvalid:
    case ErrorCode::RangeViolation:
    case ErrorCode::IndexOutOfRange: return 400;
    default: return 500;
  }
}

void mount_routes(httplib::Server& server, SessionService& service) {
  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      CreateRequest request;
      if (body.contains("condition") && !body["condition"].is_null()) {
        const auto text = body["condition"].get<std::string>();
        if (text != "auto") {
          request.condition = parse_condition(text);
          if (!request.condition) {
            throw Error(ErrorCode::InvalidConfig, "condition must be dot, nondot or auto");
          }
        }
      }
      if (body.contains("overrides")) request.overrides = body["overrides"];
      res.status = 201;
      res.set_content(service.create_session(request).dump(), kJson);
    });
  });

  server.Get(R"(/sessions/([A-Za-z0-9]+))", [&service](const httplib::Request& req,
                                                        httplib::Response& res) {
    guarded(res, [&] { res.set_content(service.get_session(req.matches[1]).dump(), kJson); });
  });

  server.Post(R"(/sessions/([A-Za-z0-9]+)/choice)", [&service](const httplib::Request& req,
                                                              httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const auto object = body.contains("object") && body["object"].is_string()
                              ? parse_object(body["object"].get<std::string>())
                              : std::nullopt;
      if (!object) {
        throw Error(ErrorCode::UnexpectedInput, "object must be cookie, drink or teddy_bear");
      }
      res.set_content(service.submit_choice(req.matches[1], *object).dump(), kJson);
    });
  });

  server.Post(R"(/sessions/([A-Za-z0-9]+)/survey)", [&service](const httplib::Request& req,
                                                              httplib::Response& res) {
    guarded(res, [&] {
      const SamRating rating = rating_from_json(parse_body(req));
      res.set_content(service.submit_survey(req.matches[1], rating).dump(), kJson);
    });
  });

  server.Get(R"(/sessions/([A-Za-z0-9]+)/events)", [&service](const httplib::Request& req,
                                                              httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const std::size_t last = last_event_of(req);
      EventBatch first = service.events_since(id, last);

      if (req.has_param("follow") && req.get_param_value("follow") == "0") {
        ordered_json events = ordered_json::array();
        for (auto& e : first.events) events.push_back(std::move(e));
        res.set_content(ordered_json{{"events", events}, {"finished", first.finished}}.dump(), kJson);
        return;
      }

      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [&service, id, cursor = last](std::size_t, httplib::DataSink& sink) mutable {
            EventBatch batch;
            try {
              batch = service.wait_events(id, cursor, kKeepAlive);
            } catch (const Error&) {
              sink.done();  // session expired while streaming
              return true;
            }
            if (batch.events.empty() && !batch.finished) {
              const std::string ping = ": keepalive\n\n";
              return sink.write(ping.data(), ping.size());
            }
            for (const auto& e : batch.events) {
              const std::string frame = sse_frame(e);
              if (!sink.write(frame.data(), frame.size())) return false;
              cursor = e["index"].get<std::size_t>();
            }
            if (batch.finished) sink.done();
            return true;
          });
    });
  });
}

int serve(SessionService& service, const std::string& host, int port) {
  httplib::Server server;
  mount_routes(server, service);

  std::jthread reaper([&service](std::stop_token stop) {
    while (!stop.stop_requested()) {
      for (int i = 0; i < 60 && !stop.stop_requested(); ++i) {
        std::this_thread::sleep_for(std::chrono::seconds(1));
      }
      service.expire_idle(SessionService::Clock::now());
    }
  });

  if (!server.bind_to_port(host, port)) return 1;
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace babble
