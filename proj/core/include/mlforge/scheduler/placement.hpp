#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <mlforge/scheduler/master_state.hpp>

namespace mlforge::sched {

/// Chooses a single alive node whose free resources cover the whole request.
class PlacementPolicy {
public:
    virtual ~PlacementPolicy() = default;
    virtual std::optional<std::string> choose(const MasterState& state, const Resources& request) const = 0;
    virtual std::string_view name() const noexcept = 0;
};

/// Minimizes GPUs left over on the chosen node; ties go to the lowest node id.
class BestFitPolicy final : public PlacementPolicy {
public:
    std::optional<std::string> choose(const MasterState& state, const Resources& request) const override;
    std::string_view name() const noexcept override { return "best-fit"; }
};

/// Lowest node id that fits.
class FirstFitPolicy final : public PlacementPolicy {
public:
    std::optional<std::string> choose(const MasterState& state, const Resources& request) const override;
    std::string_view name() const noexcept override { return "first-fit"; }
};

} // namespace mlforge::sched
