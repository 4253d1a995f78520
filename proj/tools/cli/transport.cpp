#include "transport.hpp"

#include <httplib.h>

namespace mlforge::cli {

namespace {

httplib::Headers to_httplib(const Headers& headers) {
    httplib::Headers out;
    for (const auto& [k, v] : headers) {
        out.emplace(k, v);
    }
    return out;
}

std::string with_query(const std::string& path, const Query& query) {
    if (query.empty()) {
        return path;
    }
    httplib::Params params;
    for (const auto& [k, v] : query) {
        params.emplace(k, v);
    }
    return path + "?" + httplib::detail::params_to_query_str(params);
}

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(const std::string& endpoint) : endpoint_(endpoint), client_(endpoint) {
        if (!client_.is_valid()) {
            throw ConnectionError("invalid endpoint " + endpoint);
        }
        client_.set_connection_timeout(std::chrono::seconds(5));
        client_.set_read_timeout(std::chrono::hours(24));
    }

    HttpResult send(const std::string& method, const std::string& path, const Query& query, const Headers& headers,
                    const std::string& body) override {
        const auto target = with_query(path, query);
        const auto h = to_httplib(headers);
        httplib::Result res = method == "POST" ? client_.Post(target, h, body, "application/json")
                                               : client_.Get(target, h);
        if (!res) {
            throw ConnectionError("cannot reach " + endpoint_ + ": " + httplib::to_string(res.error()));
        }
        return {res->status, res->body};
    }

    HttpResult stream(const std::string& path, const Query& query, const Headers& headers,
                      const std::function<bool(std::string_view)>& on_data) override {
        std::string error_body;
        int status = 0;
        auto res = client_.Get(
            with_query(path, query), to_httplib(headers),
            [&](const httplib::Response& r) {
                status = r.status;
                return true;
            },
            [&](const char* data, std::size_t n) {
                if (status >= 400) {
                    error_body.append(data, n);
                    return true;
                }
                return on_data(std::string_view(data, n));
            });
        if (!res && res.error() != httplib::Error::Canceled) {
            throw ConnectionError("cannot reach " + endpoint_ + ": " + httplib::to_string(res.error()));
        }
        return {res ? res->status : status, error_body};
    }

private:
    std::string endpoint_;
    httplib::Client client_;
};

} // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& endpoint) {
    return std::make_unique<HttpTransport>(endpoint);
}

} // namespace mlforge::cli
