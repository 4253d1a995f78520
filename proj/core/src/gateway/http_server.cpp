#include <mlforge/gateway/http_server.hpp>

#include <algorithm>
#include <cctype>
#include <thread>

#include <httplib.h>

namespace mlforge::gateway {

struct HttpServer::Impl {
    Router& router;
    ServerOptions options;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    Impl(Router& r, ServerOptions o) : router(r), options(std::move(o)) {}

    void handle(const httplib::Request& req, httplib::Response& res) {
        ApiRequest api;
        api.method = req.method;
        api.path = req.path;
        for (const auto& [k, v] : req.params) {
            api.query[k] = v;
        }
        for (const auto& [k, v] : req.headers) {
            std::string name = k;
            std::transform(name.begin(), name.end(), name.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            api.headers[name] = v;
        }
        api.body = req.body;
        auto out = router.route(api);
        res.status = out.status;
        if (!out.stream_session) {
            res.set_content(out.body, out.content_type);
            return;
        }
        std::shared_ptr<session::EventSubscription> sub;
        try {
            sub = router.open_stream(*out.stream_session, out.stream_replay);
        } catch (const Error& e) {
            auto err = error_response(status_for(e.code()), e.code_name(), e.what());
            res.status = err.status;
            res.set_content(err.body, err.content_type);
            return;
        }
        res.set_header("Cache-Control", "no-cache");
        const auto keepalive = options.keepalive;
        res.set_chunked_content_provider(
            "text/event-stream",
            [sub, keepalive](std::size_t, httplib::DataSink& sink) {
                auto event = sub->next(keepalive);
                if (event) {
                    const auto frame = sse_frame(*event);
                    if (!sink.write(frame.data(), frame.size())) {
                        return false;
                    }
                    if (event->terminal) {
                        sink.done();
                    }
                    return true;
                }
                if (sub->finished()) {
                    sink.done();
                    return true;
                }
                static constexpr char ping[] = ": keepalive\n\n";
                return sink.write(ping, sizeof(ping) - 1);
            },
            [sub](bool) { sub->cancel(); });
    }
};

HttpServer::HttpServer(Router& router, ServerOptions options)
    : impl_(std::make_unique<Impl>(router, std::move(options))) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    impl_->server.Put(".*", handler);
    impl_->server.Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
    auto& s = impl_->server;
    if (impl_->options.port == 0) {
        impl_->port = s.bind_to_any_port(impl_->options.host.c_str());
    } else {
        impl_->port = s.bind_to_port(impl_->options.host.c_str(), impl_->options.port) ? impl_->options.port : -1;
    }
    if (impl_->port < 0) {
        throw Error(Errc::invalid_argument,
                    "cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    s.wait_until_ready();
    return impl_->port;
}

void HttpServer::stop() {
    if (impl_ && impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

int HttpServer::port() const noexcept { return impl_->port; }

} // namespace mlforge::gateway
