#pragma once

#include <string>

#include "babble/errors.hpp"
#include "babble/service.hpp"

namespace httplib {
class Server;
}

namespace babble {

// POST /sessions, GET /sessions/{id}, POST /sessions/{id}/choice,
// POST /sessions/{id}/survey, GET /sessions/{id}/events (server-sent events;
// ?follow=0 returns a JSON snapshot instead). Errors are
// {"error": {"code": <ErrorCode name>, "message": ...}}.
void mount_routes(httplib::Server& server, SessionService& service);

int http_status(ErrorCode code);

/// Blocks serving on host:port until the process stops. Returns non-zero when
/// the port cannot be bound.
int serve(SessionService& service, const std::string& host, int port);

}  // namespace babble
