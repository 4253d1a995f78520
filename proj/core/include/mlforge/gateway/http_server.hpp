#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <mlforge/gateway/router.hpp>

namespace mlforge::gateway {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::chrono::milliseconds keepalive{15000};
};

/// Serves a Router over HTTP/1.1. Event routes are written as server-sent
/// events until the session reaches a terminal state or the client leaves.
class HttpServer {
public:
    HttpServer(Router& router, ServerOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and starts serving on a background thread. Returns the bound port.
    /// Throws Error(invalid_argument) if the address cannot be bound.
    int start();
    void stop();
    int port() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mlforge::gateway
