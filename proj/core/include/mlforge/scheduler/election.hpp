#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace mlforge::sched {

struct Candidate {
    std::string node_id;
    std::uint64_t last_event_seq = 0;
};

struct ElectionResult {
    std::string leader_id;
    std::uint64_t term = 0;

    bool operator==(const ElectionResult&) const = default;
};

/// Picks the candidate with the most complete log, breaking ties by the
/// greater node id, and opens term `old_term + 1`. A pure function of its
/// inputs, so every replica that sees the same candidates agrees.
/// Throws Error(no_candidates) on an empty set.
ElectionResult elect_leader(std::span<const Candidate> candidates, std::uint64_t old_term);

} // namespace mlforge::sched
