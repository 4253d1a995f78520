#include <mlforge/common/hyperparams.hpp>

#include <mlforge/common/error.hpp>
#include <mlforge/common/text.hpp>

namespace mlforge {

std::pair<std::string, HyperValue> parse_hyperparam(std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw Error(Errc::invalid_argument,
                    "hyperparameter must look like key=value: " + std::string(assignment));
    }
    std::string key(assignment.substr(0, eq));
    std::string_view raw = assignment.substr(eq + 1);
    if (auto real = parse_real(raw)) {
        return {std::move(key), *real};
    }
    return {std::move(key), std::string(raw)};
}

std::string format_hyperparam(const HyperValue& value) {
    if (const auto* d = std::get_if<double>(&value)) {
        return format_real(*d);
    }
    return std::get<std::string>(value);
}

std::map<std::string, double> numeric_hyperparams(const Hyperparams& params) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : params) {
        if (const auto* d = std::get_if<double>(&v)) {
            out.emplace(k, *d);
        }
    }
    return out;
}

nlohmann::json hyperparams_to_json(const Hyperparams& params) {
    auto j = nlohmann::json::object();
    for (const auto& [k, v] : params) {
        if (const auto* d = std::get_if<double>(&v)) {
            j[k] = *d;
        } else {
            j[k] = std::get<std::string>(v);
        }
    }
    return j;
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    if (j.is_null()) {
        return {};
    }
    if (!j.is_object()) {
        throw Error(Errc::invalid_argument, "hyperparams must be a JSON object");
    }
    Hyperparams out;
    for (const auto& [k, v] : j.items()) {
        if (v.is_number()) {
            out.emplace(k, v.get<double>());
        } else if (v.is_string()) {
            out.emplace(k, v.get<std::string>());
        } else {
            throw Error(Errc::invalid_argument, "hyperparameter '" + k + "' must be a number or string");
        }
    }
    return out;
}

} // namespace mlforge
