#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include <nlohmann/json.hpp>

namespace mlforge {

/// A hyperparameter is a real or a free-form string.
using HyperValue = std::variant<double, std::string>;
using Hyperparams = std::map<std::string, HyperValue>;

/// "lr=0.1" -> {"lr", 0.1}; "opt=adam" -> {"opt", "adam"}. Values that parse
/// fully as a finite real become reals.
std::pair<std::string, HyperValue> parse_hyperparam(std::string_view assignment);

std::string format_hyperparam(const HyperValue& value);

/// Only the real-valued entries, which is what workloads consume.
std::map<std::string, double> numeric_hyperparams(const Hyperparams& params);

nlohmann::json hyperparams_to_json(const Hyperparams& params);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

} // namespace mlforge
