#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <mlforge/common/error.hpp>
#include <mlforge/platform/platform.hpp>

namespace mlforge::gateway {

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;  // lower-case names
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
    /// Set when the route is a live event stream for this session; the HTTP
    /// layer serves it from SessionManager::subscribe.
    std::optional<std::string> stream_session;
    std::size_t stream_replay = 50;
};

inline constexpr const char* kUserHeader = "x-mlforge-user";
inline constexpr const char* kIdempotencyHeader = "idempotency-key";
inline constexpr const char* kDefaultUser = "user";

int status_for(Errc code) noexcept;
ApiResponse error_response(int status, std::string_view code, const std::string& message);

/// One row per route: method and path pattern. Used by parity tests and docs.
struct RouteInfo {
    std::string method;
    std::string pattern;
};
const std::vector<RouteInfo>& route_table();

/// "event: <kind>\ndata: <json>\n\n"
std::string sse_frame(const session::SessionEvent& event);

/// Translates /v1 requests into platform calls. All responses are JSON (or
/// CSV for plot.csv) with key-sorted objects, so equal state gives equal bytes.
class Router {
public:
    explicit Router(platform::Platform& platform);

    /// Thread-safe: takes the platform lock for the duration of the call.
    ApiResponse route(const ApiRequest& request);

    /// Opens the live stream for an events response. Takes the platform lock.
    std::shared_ptr<session::EventSubscription> open_stream(const std::string& session_id, std::size_t replay);

private:
    ApiResponse dispatch(const ApiRequest& request);

    platform::Platform& platform_;
    std::mutex idempotency_mutex_;
    std::map<std::string, ApiResponse> idempotent_;
};

} // namespace mlforge::gateway
