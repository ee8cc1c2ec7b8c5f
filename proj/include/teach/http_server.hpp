#pragma once

#include <memory>
#include <string>

#include "teach/session.hpp"

namespace httplib {
class Server;
}

namespace teach {

/// JSON-over-HTTP front end for a SessionService.
///
///   POST /api/sessions                 {"strategy": name | "random", "seed"?: int}
///   GET  /api/sessions/{id}/next
///   POST /api/sessions/{id}/respond    {"index": int, "choice": int}
///   GET  /api/sessions/{id}/result
///   GET  /assets/explanations/{item}.json
///   GET  /assets/*                     files under asset_dir
class HttpServer {
public:
    explicit HttpServer(SessionService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds host:port from the service config and blocks until stop().
    bool listen();
    /// Binds an ephemeral port; returns it, or -1 on failure. Serve with listen_after_bind().
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool listen_after_bind();
    void stop();
    bool is_running() const;

private:
    void install_routes();

    SessionService& service_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace teach
