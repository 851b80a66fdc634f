#pragma once

#include <memory>
#include <string>
#include <thread>

#include "mass/console.hpp"

namespace mass {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 0;  ///< 0 binds an ephemeral port
    /// Required as `Authorization: Bearer <token>` when non-empty.
    std::string token;
    int ack_timeout_ms = 5000;
};

/// GET /status, POST /override, GET /stream (chunked NDJSON, one StreamMessage per line).
class ConsoleServer {
public:
    ConsoleServer(ConsoleHub& hub, ServerConfig config);
    ~ConsoleServer();
    ConsoleServer(const ConsoleServer&) = delete;
    ConsoleServer& operator=(const ConsoleServer&) = delete;

    /// Binds and starts serving on a background thread; returns the bound port.
    /// Throws Error{SinkUnavailable} if the address cannot be bound.
    int start();
    void stop();
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    ConsoleHub& hub_;
    ServerConfig config_;
    std::thread thread_;
    int port_ = 0;
};

/// "host:port" or ":port" or "port".
ServerConfig parse_listen_address(const std::string& addr);

}  // namespace mass
