#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mlforge::fixture {

struct WorkloadStats {
    std::size_t decisions = 0;   // submit outcomes and drain placements compared
    std::size_t nodes = 0;
};

/// Drives the live scheduler and the naive reference through the same random
/// workload (submits, completions, cancels, node deaths and returns) and
/// compares every decision, the queue order, the allocations and node safety
/// after each event, and finally a log replay against the live state.
/// Returns a description of the first mismatch, or nothing.
std::optional<std::string> check_against_reference(std::uint64_t seed, int events, int max_nodes,
                                                   WorkloadStats* stats = nullptr);

} // namespace mlforge::fixture
