#include "mass/console_server.hpp"

#include <httplib.h>

#include "mass/error.hpp"

namespace mass {

using nlohmann::json;
using nlohmann::ordered_json;

struct ConsoleServer::Impl {
    httplib::Server server;
};

namespace {

void send_error(httplib::Response& res, int status, const Error& e) {
    res.status = status;
    res.set_content(ordered_json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump(), "application/json");
}

int http_status(Errc code) {
    switch (code) {
    case Errc::NoActiveSimulation: return 503;
    case Errc::HelmWithoutOverride: return 409;
    case Errc::MalformedCommand: return 400;
    default: return 500;
    }
}

}  // namespace

ServerConfig parse_listen_address(const std::string& addr) {
    ServerConfig c;
    const auto colon = addr.rfind(':');
    std::string port = addr;
    if (colon != std::string::npos) {
        if (colon > 0) c.host = addr.substr(0, colon);
        port = addr.substr(colon + 1);
    }
    try {
        std::size_t used = 0;
        c.port = std::stoi(port, &used);
        if (used != port.size() || c.port < 0 || c.port > 65535) throw std::invalid_argument("port");
    } catch (const std::exception&) {
        throw Error(Errc::MalformedCommand, "bad listen address '" + addr + "'");
    }
    return c;
}

ConsoleServer::ConsoleServer(ConsoleHub& hub, ServerConfig config)
    : impl_(std::make_unique<Impl>()), hub_(hub), config_(std::move(config)) {
    auto& svr = impl_->server;

    svr.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (config_.token.empty() || req.get_header_value("Authorization") == "Bearer " + config_.token) {
            return httplib::Server::HandlerResponse::Unhandled;
        }
        res.status = 401;
        res.set_header("WWW-Authenticate", "Bearer");
        res.set_content(R"({"error":"Unauthorized"})", "application/json");
        return httplib::Server::HandlerResponse::Handled;
    });

    svr.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
        try {
            const auto s = hub_.status();
            res.set_content(s.body->dump(), "application/json");
        } catch (const Error& e) {
            send_error(res, http_status(e.code()), e);
        }
    });

    svr.Post("/override", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            json doc;
            try {
                doc = json::parse(req.body);
            } catch (const json::parse_error& e) {
                throw Error(Errc::MalformedCommand, e.what());
            }
            auto ack = hub_.submit(parse_override(doc));
            if (ack.wait_for(std::chrono::milliseconds(config_.ack_timeout_ms)) != std::future_status::ready) {
                res.status = 202;
                res.set_content(R"({"accepted":true,"effect_time":null})", "application/json");
                return;
            }
            const double t = ack.get();
            res.set_content(ordered_json{{"accepted", true}, {"effect_time", t}}.dump(), "application/json");
        } catch (const Error& e) {
            send_error(res, http_status(e.code()), e);
        }
    });

    svr.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
        auto sub = hub_.subscribe();
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "application/x-ndjson",
            [sub](std::size_t, httplib::DataSink& sink) {
                try {
                    if (auto m = sub->next(std::chrono::milliseconds(200))) {
                        const std::string line = m->line();
                        if (!sink.write(line.data(), line.size())) return false;
                    }
                    return sink.is_writable();
                } catch (const Error&) {
                    sink.done();
                    return true;
                }
            },
            [sub](bool) { sub->close(); });
    });
}

ConsoleServer::~ConsoleServer() { stop(); }

int ConsoleServer::start() {
    auto& svr = impl_->server;
    port_ = config_.port == 0 ? svr.bind_to_any_port(config_.host) : (svr.bind_to_port(config_.host, config_.port)
                                                                          ? config_.port
                                                                          : -1);
    if (port_ <= 0) {
        throw Error(Errc::SinkUnavailable, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    thread_ = std::thread([&svr] { svr.listen_after_bind(); });
    svr.wait_until_ready();
    return port_;
}

void ConsoleServer::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace mass
