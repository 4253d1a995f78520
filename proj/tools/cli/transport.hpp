#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mlforge::cli {

using Query = std::vector<std::pair<std::string, std::string>>;
using Headers = std::map<std::string, std::string>;

struct HttpResult {
    int status = 0;
    std::string body;
};

/// The gateway could not be reached or the connection dropped.
class ConnectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Transport {
public:
    virtual ~Transport() = default;

    /// Throws ConnectionError.
    virtual HttpResult send(const std::string& method, const std::string& path, const Query& query,
                            const Headers& headers, const std::string& body) = 0;

    /// GET whose body is handed to `on_data` as it arrives; return false to
    /// stop reading. The result body is set only for error statuses.
    virtual HttpResult stream(const std::string& path, const Query& query, const Headers& headers,
                              const std::function<bool(std::string_view)>& on_data) = 0;
};

using TransportFactory = std::function<std::unique_ptr<Transport>(const std::string& endpoint)>;

/// "http://host:port" over cpp-httplib.
std::unique_ptr<Transport> make_http_transport(const std::string& endpoint);

} // namespace mlforge::cli
