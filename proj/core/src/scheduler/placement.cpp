#include <mlforge/scheduler/placement.hpp>

namespace mlforge::sched {

std::optional<std::string> BestFitPolicy::choose(const MasterState& state, const Resources& request) const {
    std::optional<std::string> best;
    std::int64_t best_leftover = 0;
    // Registry is ordered by node id, so strict '<' keeps the lowest id on ties.
    for (const auto& [id, node] : state.registry) {
        if (!node.alive || !request.fits_within(node.free())) {
            continue;
        }
        const std::int64_t leftover = node.free().gpus - request.gpus;
        if (!best || leftover < best_leftover) {
            best = id;
            best_leftover = leftover;
        }
    }
    return best;
}

std::optional<std::string> FirstFitPolicy::choose(const MasterState& state, const Resources& request) const {
    for (const auto& [id, node] : state.registry) {
        if (node.alive && request.fits_within(node.free())) {
            return id;
        }
    }
    return std::nullopt;
}

} // namespace mlforge::sched
