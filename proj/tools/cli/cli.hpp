#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "transport.hpp"

namespace mlforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRemote = 2;
inline constexpr int kExitConnectivity = 3;

inline constexpr const char* kDefaultEndpoint = "http://127.0.0.1:8080";

/// Runs one CLI invocation. `args` excludes the program name. MLFORGE_ENDPOINT
/// and MLFORGE_USER in `env` take precedence over --endpoint and --user.
int dispatch(const std::vector<std::string>& args, const std::map<std::string, std::string>& env,
             std::ostream& out, std::ostream& err, const TransportFactory& transport = make_http_transport);

/// Command path ("session tune") and the gateway route it calls.
struct CommandRoute {
    std::string command;
    std::string method;
    std::string pattern;
};
const std::vector<CommandRoute>& command_routes();

} // namespace mlforge::cli
