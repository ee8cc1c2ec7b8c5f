#include "teach/http_server.hpp"

#include <iostream>

#include "httplib.h"

namespace teach {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const ServiceError& e) {
            send_json(res, e.http_status(), json{{"error", e.what()}});
        } catch (const json::exception& e) {
            send_json(res, 400, json{{"error", std::string("malformed request: ") + e.what()}});
        } catch (const std::exception& e) {
            send_json(res, 500, json{{"error", e.what()}});
        }
    };
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
}

} // namespace

HttpServer::HttpServer(SessionService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
    auto& srv = *server_;

    srv.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        const std::string strategy = body.value("strategy", std::string("random"));
        std::optional<std::uint64_t> seed;
        if (body.contains("seed") && !body.at("seed").is_null()) seed = body.at("seed").get<std::uint64_t>();
        send_json(res, 201, service_.create_session(strategy, seed));
    }));

    srv.Get("/api/sessions/:id/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_.next_item(req.path_params.at("id")));
    }));

    srv.Post("/api/sessions/:id/respond", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        if (!body.contains("index") || !body.contains("choice"))
            throw ServiceError(ServiceError::Kind::BadRequest, "respond needs 'index' and 'choice'");
        const auto index = body.at("index").get<std::int64_t>();
        if (index < 0) throw ServiceError(ServiceError::Kind::BadRequest, "negative index");
        send_json(res, 200,
                  service_.respond(req.path_params.at("id"), static_cast<std::size_t>(index), body.at("choice").get<int>()));
    }));

    srv.Get("/api/sessions/:id/result", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_.result(req.path_params.at("id")));
    }));

    srv.Get(R"(/assets/explanations/([^/]+)\.json)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_.explanation_asset(req.matches[1]));
    }));

    const auto& cfg = service_.config();
    if (!cfg.asset_dir.empty()) srv.set_mount_point("/assets", cfg.asset_dir.string());
    if (!cfg.static_dir.empty()) srv.set_mount_point("/", cfg.static_dir.string());
}

bool HttpServer::listen() {
    const auto& cfg = service_.config();
    std::clog << "serving on " << cfg.host << ":" << cfg.port << '\n';
    return server_->listen(cfg.host, cfg.port);
}

int HttpServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_) server_->stop();
}

bool HttpServer::is_running() const { return server_->is_running(); }

} // namespace teach
