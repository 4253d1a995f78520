#include <mlforge/scheduler/election.hpp>

#include <mlforge/common/error.hpp>

namespace mlforge::sched {

ElectionResult elect_leader(std::span<const Candidate> candidates, std::uint64_t old_term) {
    if (candidates.empty()) {
        throw Error(Errc::no_candidates, "leader election needs at least one candidate");
    }
    const Candidate* winner = &candidates.front();
    for (const auto& c : candidates.subspan(1)) {
        if (c.last_event_seq > winner->last_event_seq ||
            (c.last_event_seq == winner->last_event_seq && c.node_id > winner->node_id)) {
            winner = &c;
        }
    }
    return ElectionResult{winner->node_id, old_term + 1};
}

} // namespace mlforge::sched
