#include "support/workload.hpp"

#include <map>
#include <random>
#include <set>

#include <mlforge/blobstore/blob_store.hpp>
#include <mlforge/scheduler/event_log.hpp>
#include <mlforge/scheduler/scheduler.hpp>

#include "support/reference_scheduler.hpp"

namespace mlforge::fixture {

using namespace sched;

namespace {

std::string describe(const PlacementDecision& d) {
    if (d.placed()) return "placed:" + d.node_id();
    if (d.queued()) return "queued:" + std::to_string(std::get<Queued>(d.outcome).position);
    return "rejected";
}

std::vector<std::pair<std::string, std::string>> pairs(const std::vector<PlacementDecision>& ds) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& d : ds) out.emplace_back(d.job_id, d.node_id());
    return out;
}

std::optional<std::string> unsafe(const MasterState& s) {
    for (const auto& [id, node] : s.registry) {
        Resources sum{};
        for (const auto& [job, alloc] : s.allocations) {
            if (alloc.node_id == id) sum += alloc.spec.request;
        }
        if (!sum.fits_within(node.descriptor.total)) return "oversubscribed " + id;
        if (sum != node.allocated) return "allocation accounting drifted on " + id;
    }
    for (const auto& q : s.queue) {
        if (s.allocations.contains(q.spec.job_id)) return q.spec.job_id + " both queued and allocated";
    }
    return std::nullopt;
}

} // namespace

std::optional<std::string> check_against_reference(std::uint64_t seed, int events, int max_nodes,
                                                   WorkloadStats* stats) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    const auto where = [&](int e) { return " (seed " + std::to_string(seed) + ", event " + std::to_string(e) + ")"; };

    store::BlobStore blobs;
    EventLog log(blobs);
    ManualClock clock;
    Scheduler live(log, clock, ElectionResult{"m", 1});
    ReferenceScheduler oracle;
    WorkloadStats local;
    auto& st = stats ? *stats : local;

    const int node_count = 1 + static_cast<int>(pick(static_cast<std::size_t>(max_nodes)));
    st.nodes = static_cast<std::size_t>(node_count);
    std::vector<std::string> nodes;
    std::map<std::string, Resources> totals;
    std::set<std::string> dead;
    const std::int64_t gpu_sizes[] = {1, 2, 4, 8};
    for (int i = 0; i < node_count; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "n%02d", i);
        const Resources total{gpu_sizes[pick(4)], 4 + static_cast<std::int64_t>(pick(29)),
                              1024 * (1 + static_cast<std::int64_t>(pick(8)))};
        live.register_node({name, total});
        oracle.add_node(name, total);
        nodes.emplace_back(name);
        totals[name] = total;
    }

    int next_job = 0;
    std::uint64_t hb_seq = 1;
    for (int e = 0; e < events; ++e) {
        const auto roll = pick(100);
        if (roll < 55) {
            const std::string id = "j" + std::to_string(next_job++);
            const JobSpec spec{id, id,
                               Resources{static_cast<std::int64_t>(pick(9)), static_cast<std::int64_t>(pick(8)),
                                         static_cast<std::int64_t>(pick(4096))},
                               static_cast<int>(pick(3)), clock.now()};
            const auto got = describe(live.submit_job(spec));
            const auto want = oracle.submit(spec);
            if (got != want) return "submit " + id + ": " + got + " vs reference " + want + where(e);
            ++st.decisions;
            if (pick(2)) clock.advance(Duration{1});
        } else if (roll < 85) {
            if (live.state().allocations.empty()) continue;
            auto it = live.state().allocations.begin();
            std::advance(it, static_cast<long>(pick(live.state().allocations.size())));
            const auto job = it->first;
            const auto got = pairs(live.complete_job(job));
            if (got != oracle.complete(job)) return "drain after completing " + job + " differs" + where(e);
            st.decisions += got.size();
        } else if (roll < 90) {
            if (live.state().queue.empty()) continue;
            const auto job = live.state().queue[pick(live.state().queue.size())].spec.job_id;
            live.cancel_job(job);
            const auto got = pairs(live.drain_queue());
            if (got != oracle.cancel(job)) return "drain after cancelling " + job + " differs" + where(e);
            st.decisions += got.size();
        } else if (roll < 95) {
            // A node goes silent; everyone else keeps beating.
            const auto victim = nodes[pick(nodes.size())];
            clock.advance(Duration{6001});
            for (const auto& n : nodes) {
                if (n != victim && !dead.contains(n)) live.heartbeat({n, totals[n], hb_seq++, clock.now()});
            }
            if (!dead.contains(victim)) {
                auto report = live.check_liveness();
                if (report.dead_nodes != std::vector<std::string>{victim}) return "liveness missed " + victim + where(e);
                oracle.node_dead(victim);
                dead.insert(victim);
            }
        } else {
            if (dead.empty()) continue;
            const auto back = *dead.begin();
            live.heartbeat({back, totals[back], hb_seq++, clock.now()});
            oracle.node_alive(back);
            dead.erase(back);
            const auto got = pairs(live.drain_queue());
            if (got != oracle.drain()) return "drain after " + back + " returned differs" + where(e);
            st.decisions += got.size();
        }

        if (auto bad = unsafe(live.state())) return *bad + where(e);
        std::vector<std::string> queue;
        for (const auto& q : live.state().queue) queue.push_back(q.spec.job_id);
        if (queue != oracle.queue_order()) return "queue order differs" + where(e);
        std::map<std::string, std::string> alloc;
        for (const auto& [job, a] : live.state().allocations) alloc[job] = a.node_id;
        if (alloc != oracle.allocations()) return "allocations differ" + where(e);
    }

    if (!(recover_state(log) == live.state())) return "log replay differs from live state (seed " + std::to_string(seed) + ")";
    return std::nullopt;
}

} // namespace mlforge::fixture
