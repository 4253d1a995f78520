// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// limits are fixed here; a criterion that runs over its limit fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <mlforge/agent/environment.hpp>
#include <mlforge/agent/mount_table.hpp>
#include <mlforge/blobstore/blob_store.hpp>
#include <mlforge/common/error.hpp>
#include <mlforge/common/text.hpp>
#include <mlforge/scheduler/election.hpp>
#include <mlforge/scheduler/event_log.hpp>
#include <mlforge/scheduler/scheduler.hpp>

#include "support/fixtures.hpp"
#include "support/live_gateway.hpp"
#include "support/workload.hpp"

using namespace mlforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome pass(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

struct Criterion {
    std::string name;
    std::chrono::milliseconds limit;
    std::function<Outcome()> run;
};

std::string seconds(std::chrono::nanoseconds d) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(3);
    s << std::chrono::duration<double>(d).count() << "s";
    return s.str();
}

// ---------------------------------------------------------------------------
// Scheduler

sched::Scheduler fresh_scheduler(store::BlobStore& blobs, sched::EventLog& log, const Clock& clock) {
    (void)blobs;
    return sched::Scheduler(log, clock, sched::ElectionResult{"m", 1});
}

Outcome fragmentation() {
    // Every node carries a 4-GPU job that also takes most of its CPUs, so no
    // node can host two of them and each keeps exactly 4 GPUs busy.
    for (int release = 0; release < 10; ++release) {
        store::BlobStore blobs;
        sched::EventLog log(blobs);
        ManualClock clock;
        auto s = fresh_scheduler(blobs, log, clock);
        for (int i = 0; i < 10; ++i) {
            s.register_node({"node-" + std::to_string(i), {8, 32, 65536}});
        }
        for (int i = 0; i < 10; ++i) {
            const auto d = s.submit_job({"busy-" + std::to_string(i), "", {4, 20, 1024}, 0, clock.now()});
            if (!d.placed() || d.node_id() != "node-" + std::to_string(i)) {
                return fail("busy job " + std::to_string(i) + " not on its own node");
            }
        }
        const auto big = s.submit_job({"eight", "", {8, 4, 1024}, 0, clock.now()});
        if (!big.queued()) {
            return fail("8-GPU job was not queued with 4 GPUs busy on every node");
        }
        const auto placed = s.complete_job("busy-" + std::to_string(release));
        if (placed.size() != 1 || placed[0].job_id != "eight" ||
            placed[0].node_id() != "node-" + std::to_string(release)) {
            return fail("8-GPU job not placed right after node-" + std::to_string(release) + " freed");
        }
        if (!s.state().queue.empty()) {
            return fail("queue not empty after placement");
        }
    }
    return pass("queued with 10x4 busy; placed on the freed node for all 10 choices");
}

Outcome fast_path() {
    std::mt19937_64 rng(7);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    store::BlobStore blobs;
    sched::EventLog log(blobs);
    ManualClock clock;
    auto s = fresh_scheduler(blobs, log, clock);
    for (int i = 0; i < 20; ++i) {
        s.register_node({"n" + std::to_string(i), {static_cast<std::int64_t>(1 + pick(8)), 64, 1 << 20}});
    }
    std::size_t fast = 0, slow = 0;
    for (int i = 0; i < 10000; ++i) {
        // Alternate filling and draining phases so both paths are exercised.
        const bool draining = (i / 250) % 2 == 1;
        const int releases = draining ? 2 : (pick(100) < 30 ? 1 : 0);
        for (int r = 0; r < releases && !s.state().allocations.empty(); ++r) {
            auto it = s.state().allocations.begin();
            std::advance(it, static_cast<long>(pick(s.state().allocations.size())));
            s.complete_job(it->first);
        }
        const bool queue_empty = s.state().queue.empty();
        const auto queue_len = s.state().queue.size();
        const auto ops = s.queue_ops();
        const auto d = s.submit_job({"j" + std::to_string(i), "", {static_cast<std::int64_t>(pick(9)), 1, 1}, 0,
                                     clock.now()});
        clock.advance(Duration{1});
        if (queue_empty && d.placed()) {
            ++fast;
            if (s.queue_ops() != ops || s.state().queue.size() != queue_len) {
                return fail("fast-path submit " + std::to_string(i) + " touched the queue");
            }
        } else {
            ++slow;
        }
    }
    if (fast == 0 || slow == 0) {
        return fail("workload did not exercise both paths");
    }
    return pass(std::to_string(fast) + " fast-path submits with 0 queue ops; " + std::to_string(slow) +
                " via queue or rejected");
}

Outcome safety_and_ordering() {
    std::size_t decisions = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        fixture::WorkloadStats st;
        if (auto failure = fixture::check_against_reference(seed, 1000, 20, &st)) {
            return fail(*failure);
        }
        decisions += st.decisions;
    }
    // Equal priority: placement order is submission order.
    store::BlobStore blobs;
    sched::EventLog log(blobs);
    ManualClock clock;
    auto s = fresh_scheduler(blobs, log, clock);
    s.register_node({"n0", {1, 64, 1 << 20}});
    s.submit_job({"hold", "", {1, 0, 0}, 0, clock.now()});
    std::vector<std::string> submitted, placed;
    for (int i = 0; i < 50; ++i) {
        clock.advance(Duration{1});
        submitted.push_back("q" + std::to_string(i));
        s.submit_job({submitted.back(), "", {1, 0, 0}, 3, clock.now()});
    }
    std::string running = "hold";
    for (int i = 0; i < 50; ++i) {
        auto next = s.complete_job(running);
        if (next.size() != 1) return fail("expected one placement per release");
        running = next[0].job_id;
        placed.push_back(running);
    }
    if (placed != submitted) {
        return fail("equal-priority placement order differs from submission order");
    }
    return pass("60 workloads x 1000 events on up to 20 nodes, " + std::to_string(decisions) +
                " decisions equal to reference; FIFO within priority");
}

struct Crash {};

std::optional<std::string> state_diff(const sched::MasterState& a, const sched::MasterState& b) {
    if (a.term != b.term) return "term";
    if (a.leader_id != b.leader_id) return "leader_id";
    if (a.registry != b.registry) return "registry";
    if (a.queue != b.queue) return "queue";
    if (a.allocations != b.allocations) return "allocations";
    if (a.event_log_seq != b.event_log_seq) return "event_log_seq";
    if (a.next_order != b.next_order) return "next_order";
    return std::nullopt;
}

std::optional<std::string> failover_point(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    store::BlobStore blobs;
    ManualClock clock;
    sched::MasterState shadow;
    bool crash_armed = false;

    sched::EventLog log_a(blobs);
    log_a.set_after_append_hook([&](const sched::Event& e) {
        sched::apply(shadow, e);
        if (crash_armed) {
            throw Crash{};
        }
    });
    const std::vector<std::string> replicas{"node-0", "node-1", "node-2"};
    sched::Scheduler a(log_a, clock, sched::ElectionResult{"node-2", 1});
    for (int i = 0; i < 6; ++i) {
        a.register_node({"node-" + std::to_string(i), {static_cast<std::int64_t>(2 + pick(7)), 32, 65536}});
    }

    std::set<std::string> acknowledged;  // live jobs whose submit returned
    std::map<std::string, std::uint64_t> observed;  // replica -> last seq seen in an ack
    const int crash_at = 5 + static_cast<int>(pick(295));
    int next_job = 0;
    std::string in_flight;
    std::string in_flight_job;
    bool crashed = false;
    std::uint64_t hb = 1;
    auto run_command = [&](sched::Scheduler& s, bool can_crash, int index) {
        crash_armed = can_crash && index == crash_at;
        const auto roll = pick(100);
        if (roll < 55) {
            const std::string id = "j" + std::to_string(next_job++);
            in_flight = "submit " + id;
            in_flight_job = id;
            const auto d = s.submit_job({id, "", {static_cast<std::int64_t>(1 + pick(4)), 1, 1}, static_cast<int>(pick(3)),
                                         clock.now()});
            if (!d.rejected()) acknowledged.insert(id);
        } else if (roll < 85 && !s.state().allocations.empty()) {
            auto it = s.state().allocations.begin();
            std::advance(it, static_cast<long>(pick(s.state().allocations.size())));
            const auto job = it->first;
            in_flight = "complete " + job;
            in_flight_job = job;
            s.complete_job(job);
            acknowledged.erase(job);
        } else if (roll < 90 && !s.state().queue.empty()) {
            const auto job = s.state().queue[pick(s.state().queue.size())].spec.job_id;
            in_flight = "cancel " + job;
            in_flight_job = job;
            s.cancel_job(job);
            acknowledged.erase(job);
        } else {
            const auto& node = *std::next(s.state().registry.begin(), static_cast<long>(pick(s.state().registry.size())));
            in_flight = "heartbeat " + node.first;
            in_flight_job.clear();
            const auto ack = s.heartbeat({node.first, node.second.free(), hb++, clock.now()});
            if (node.first < "node-3") observed[node.first] = ack.event_log_seq;
        }
        clock.advance(Duration{1 + static_cast<std::int64_t>(pick(50))});
    };
    for (int i = 0; i < 300 && !crashed; ++i) {
        try {
            run_command(a, true, i);
            if (auto diff = state_diff(a.state(), shadow)) return "live state and shadow disagree on " + *diff;
        } catch (const Crash&) {
            crashed = true;
        }
    }
    crash_armed = false;
    if (!crashed) return "crash point never reached";

    // Election among the surviving replicas, by the log position each last saw.
    std::vector<sched::Candidate> candidates;
    for (const auto& r : replicas) {
        candidates.push_back({r, observed[r]});
    }
    const auto result = sched::elect_leader(candidates, log_a.term());
    std::string expected;
    std::uint64_t best = 0;
    for (const auto& c : candidates) {
        if (expected.empty() || c.last_event_seq > best || (c.last_event_seq == best && c.node_id > expected)) {
            expected = c.node_id;
            best = c.last_event_seq;
        }
    }
    if (result.leader_id != expected || result.term != 2) return "election picked " + result.leader_id;
    for (int i = 0; i < 5; ++i) {
        std::shuffle(candidates.begin(), candidates.end(), rng);
        if (!(sched::elect_leader(candidates, log_a.term()) == result)) return "election depends on candidate order";
    }

    sched::EventLog log_b(blobs);
    log_b.set_after_append_hook([&](const sched::Event& e) { sched::apply(shadow, e); });
    sched::Scheduler b(log_b, clock, result);
    if (auto diff = state_diff(b.state(), shadow)) return "recovered state differs from shadow on " + *diff;
    if (!(sched::recover_state(log_b) == shadow)) return "log replay differs from shadow";

    // Only the command that was in flight may be missing.
    std::size_t lost = 0;
    for (const auto& job : acknowledged) {
        if (job != in_flight_job && !b.state().knows_job(job)) ++lost;
    }
    if (lost > 0) return std::to_string(lost) + " acknowledged jobs lost (in flight: " + in_flight + ")";

    // The deposed master is fenced off.
    try {
        a.submit_job({"stale", "", {1, 1, 1}, 0, clock.now()});
        return "old master still accepted a write";
    } catch (const Error& e) {
        if (e.code() != Errc::not_master) return "old master failed with " + std::string(e.code_name());
    }

    b.drain_queue();
    for (int i = 0; i < 50; ++i) {
        run_command(b, false, i);
    }
    if (auto diff = state_diff(b.state(), shadow)) return "new master and shadow disagree on " + *diff;
    return std::nullopt;
}

Outcome failover() {
    std::mt19937_64 seeds(2024);
    for (int point = 0; point < 50; ++point) {
        const auto seed = seeds();
        if (auto failure = failover_point(seed)) {
            return fail("point " + std::to_string(point) + ": " + *failure);
        }
    }
    return pass("50 crash points: unique deterministic leader, recovered == shadow, no acknowledged command lost");
}

// ---------------------------------------------------------------------------
// Sessions

using fixture::TestCluster;

std::vector<std::tuple<std::int64_t, std::string, double>> series(platform::Platform& p, const std::string& id) {
    std::vector<std::tuple<std::int64_t, std::string, double>> out;
    for (const auto& m : p.metrics().query(id, {})) {
        out.emplace_back(m.step, m.name, m.value);
    }
    return out;
}

bool tick_until_step(platform::Platform& p, const std::string& id, std::int64_t step) {
    for (int i = 0; i < 10000; ++i) {
        if (p.sessions().get(id).step >= step) return p.sessions().get(id).step == step;
        p.tick();
    }
    return false;
}

Outcome resume_determinism() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> lr_dist(0.001, 1.0), l0_dist(0.1, 10.0);
    for (int t = 0; t < 100; ++t) {
        const double lr = lr_dist(rng), l0 = l0_dist(rng);
        const auto k = static_cast<std::int64_t>(1 + rng() % 199);
        TestCluster c(1, {2, 32, 65536});
        auto& p = c.platform;
        const Hyperparams hp{{"lr", lr}, {"l0", l0}};
        const auto straight = p.sessions().create(c.request("kim", hp, 200)).session_id;
        const auto paused = p.sessions().create(c.request("kim", hp, 200)).session_id;
        if (!tick_until_step(p, paused, k)) return fail("could not stop at step " + std::to_string(k));
        p.sessions().pause_and_tune(paused, {});
        p.run_until_idle();
        const auto a = series(p, straight), b = series(p, paused);
        if (a.size() != 400) return fail("uninterrupted run logged " + std::to_string(a.size()) + " points");
        if (a != b) {
            return fail("triple " + std::to_string(t) + " (lr=" + format_real(lr) + ", l0=" + format_real(l0) +
                        ", k=" + std::to_string(k) + ") diverged after resume");
        }
    }
    return pass("100 (lr, l0, k) triples, 200 steps: pause at k + resume bit-identical to uninterrupted");
}

Outcome tune_semantics() {
    TestCluster c(1, {4, 32, 65536});
    auto& p = c.platform;
    const Hyperparams hp{{"lr", 0.1}, {"l0", 1.0}};
    const auto tuned = p.sessions().create(c.request("kim", hp, 20)).session_id;
    const auto identity = p.sessions().create(c.request("kim", hp, 20)).session_id;
    const auto empty = p.sessions().create(c.request("kim", hp, 20)).session_id;
    const auto baseline = p.sessions().create(c.request("kim", hp, 20)).session_id;
    if (!tick_until_step(p, tuned, 10)) return fail("could not stop at step 10");
    p.sessions().pause_and_tune(tuned, {{"lr", 0.5}});
    p.sessions().pause_and_tune(identity, {{"lr", 0.1}});
    p.sessions().pause_and_tune(empty, {});
    p.run_until_idle();
    double loss12 = -1;
    for (const auto& m : p.metrics().query(tuned, {"loss", 12, 12, std::nullopt})) {
        loss12 = m.value;
    }
    // lr 0.1 for 10 steps gives progress 1, then 0.5 for 2 more gives 2: loss = 1 / (1 + 2).
    const double expected = 1.0 / 3.0;
    if (loss12 != expected) {
        return fail("loss(12) = " + format_real(loss12) + ", expected " + format_real(expected));
    }
    if (series(p, identity) != series(p, baseline) || series(p, empty) != series(p, baseline)) {
        return fail("identity tune changed the metric series");
    }
    const auto& hist = p.sessions().get(tuned).history;
    const bool noted = std::any_of(hist.begin(), hist.end(), [](const auto& h) {
        return h.transition == "TUNED" && h.detail == "lr: 0.1 -> 0.5";
    });
    if (!noted) return fail("TUNED history record missing");
    return pass("loss(12) == 1/3 exactly; identity and empty tunes leave the series unchanged");
}

Outcome leaderboard() {
    TestCluster c(3);
    auto& p = c.platform;
    const std::vector<double> lrs{0.05, 0.1, 0.2};
    std::map<std::string, double> lr_of;
    for (double lr : lrs) {
        const auto id = p.sessions().create(c.request("u" + format_real(lr), {{"lr", lr}, {"l0", 1.0}}, 50)).session_id;
        lr_of[id] = lr;
    }
    p.run_until_idle();
    const auto board = p.leaderboard().board({"mnist", 0}, std::nullopt, false);
    if (board.size() != 3) return fail("board has " + std::to_string(board.size()) + " entries");
    for (std::size_t i = 0; i < board.size(); ++i) {
        const double lr = lr_of.at(board[i].session_id);
        if (lr != lrs[lrs.size() - 1 - i]) return fail("board not in descending lr order");
        const double derived = 1.0 - 1.0 / (1.0 + lr * 50.0);
        if (std::abs(board[i].best_value - derived) > 1e-12) {
            return fail("best acc " + format_real(board[i].best_value) + " vs derived " + format_real(derived));
        }
    }
    // Best-checkpoint pointer: recomputed from the raw score reports.
    for (const auto& [id, lr] : lr_of) {
        const auto& reports = p.sessions().score_history(id);
        if (reports.empty()) return fail(id + " has no score reports");
        const auto* best = &reports.front();
        for (const auto& r : reports) {
            if (r.value > best->value) best = &r;
        }
        std::optional<std::int64_t> expected;
        for (const auto& ck : p.checkpoints().list(id)) {
            if (ck.step <= best->step) expected = ck.step;
        }
        const auto& s = p.sessions().get(id);
        if (s.best_checkpoint_step != expected || p.checkpoints().best_step(id) != expected) {
            return fail(id + " best checkpoint pointer differs from argmax oracle");
        }
    }
    return pass("order lr 0.2 > 0.1 > 0.05; acc matches 1 - l0/(1+50 lr); best pointers match argmax oracle");
}

// ---------------------------------------------------------------------------
// Storage

Outcome storage() {
    std::mt19937_64 rng(5);
    store::BlobStore blobs;
    std::vector<Bytes> payloads;
    std::set<Bytes> distinct;
    for (int i = 0; i < 1000; ++i) {
        Bytes b(rng() % 4096);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        // Every tenth blob repeats an earlier one.
        if (i % 10 == 9) b = payloads[rng() % payloads.size()];
        payloads.push_back(b);
        distinct.insert(b);
    }
    std::vector<store::Digest> digests;
    for (const auto& b : payloads) digests.push_back(blobs.put_blob(b));
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        if (blobs.get_blob(digests[i]) != payloads[i]) return fail("round trip mismatch at blob " + std::to_string(i));
    }
    for (const auto& b : payloads) blobs.put_blob(b);
    std::uint64_t distinct_bytes = 0;
    for (const auto& b : distinct) distinct_bytes += b.size();
    const auto st = blobs.stats();
    if (st.objects != distinct.size() || st.stored_bytes != distinct_bytes) {
        return fail("stored " + std::to_string(st.objects) + " objects for " + std::to_string(distinct.size()) +
                    " distinct payloads");
    }

    // Concurrent mounts of one dataset fetch it once.
    ManualClock clock;
    store::DatasetCatalog catalog(blobs, clock);
    catalog.push("mnist", fixture::dataset_files());
    agent::MountTable mounts(catalog);
    constexpr int kMounts = 32;
    {
        std::vector<std::thread> threads;
        for (int i = 0; i < kMounts; ++i) {
            threads.emplace_back([&, i] { mounts.mount({"mnist", 1}, "s" + std::to_string(i)); });
        }
        for (auto& t : threads) t.join();
    }
    if (mounts.fetch_count() != 1 || mounts.refcount({"mnist", 1}) != kMounts) {
        return fail("fetch count " + std::to_string(mounts.fetch_count()) + " for " + std::to_string(kMounts) +
                    " concurrent mounts");
    }

    // Environment builds: one per distinct canonical spec.
    const std::vector<std::pair<std::string, std::string>> pkgs{{"numpy", "1.16"}, {"torch", "1.0"}, {"six", "1.12"}};
    std::vector<agent::EnvironmentSpec> specs;
    std::set<std::pair<std::string, std::set<std::pair<std::string, std::string>>>> unique;
    for (int i = 0; i < 200; ++i) {
        agent::EnvironmentSpec spec;
        spec.base_image = i % 3 == 0 ? "python:3.6" : "python:3.7";
        const auto mask = rng() % 8;
        for (std::size_t j = 0; j < pkgs.size(); ++j) {
            if (mask & (1u << j)) spec.packages.push_back(pkgs[j]);
        }
        if (!spec.packages.empty() && rng() % 2) spec.packages.push_back(spec.packages.front());
        std::shuffle(spec.packages.begin(), spec.packages.end(), rng);
        unique.insert({spec.base_image, {spec.packages.begin(), spec.packages.end()}});
        specs.push_back(spec);
    }
    agent::EnvironmentCache envs;
    {
        std::vector<std::thread> threads;
        for (int t = 0; t < 8; ++t) {
            threads.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < specs.size(); i += 8) envs.prepare(specs[i]);
            });
        }
        for (auto& t : threads) t.join();
    }
    if (envs.build_count() != unique.size()) {
        return fail(std::to_string(envs.build_count()) + " builds for " + std::to_string(unique.size()) +
                    " distinct specs");
    }

    // End to end: sessions sharing a node share the mount.
    TestCluster c(1, {8, 32, 65536});
    for (int i = 0; i < 8; ++i) c.platform.sessions().create(c.request("kim", {}, 5));
    if (c.platform.agents()[0]->mounts().fetch_count() != 1) return fail("co-located sessions fetched the dataset twice");
    c.platform.run_until_idle();

    return pass("1000 blobs round-trip, " + std::to_string(distinct.size()) + " distinct stored once; " +
                std::to_string(kMounts) + " mounts -> 1 fetch; " + std::to_string(unique.size()) +
                " distinct env specs -> " + std::to_string(envs.build_count()) + " builds");
}

// ---------------------------------------------------------------------------
// CLI end to end

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_end_to_end() {
    const fs::path golden_dir = fs::path(MLFORGE_GOLDEN_DIR) / "e2e";
    const bool update = std::getenv("MLFORGE_UPDATE_GOLDENS") != nullptr;
    const auto work = fs::temp_directory_path() / ("mlforge-e2e-" + std::to_string(::getpid()));
    fs::remove_all(work);
    auto write = [&](const std::string& rel, const std::string& content) {
        fs::create_directories((work / rel).parent_path());
        std::ofstream(work / rel, std::ios::binary) << content;
    };
    write("code/main.py", "import mlforge\n\nmlforge.train()\n");
    write("code/model.py", "LAYERS = 3\n");
    write("code/.mlforgeignore", "*.ckpt\n");
    write("code/old.ckpt", "stale weights");
    write("data/train/0.bin", "0000");
    write("data/train/1.bin", "1111");
    write("data/test/0.bin", "00");

    fixture::LiveGateway gw(3);
    const auto code = (work / "code").string();
    struct Step {
        std::string name;
        std::vector<std::string> args;
        std::string user;
    };
    const std::vector<Step> steps{
        {"01_dataset_push", {"dataset", "push", "digits", (work / "data").string(), "--board-metric", "acc"}, "kim"},
        {"02_run_kim", {"run", "main.py", "-d", "digits", "--hp", "lr=0.1", "--max-steps", "20", "--dir", code}, "kim"},
        {"03_run_lee", {"run", "main.py", "-d", "digits", "--hp", "lr=0.3", "--max-steps", "20", "--dir", code}, "lee"},
        {"04_logs_tail", {"logs", "--tail", "4", "kim/digits/1"}, "kim"},
        {"05_plot", {"plot", "--metric", "loss", "kim/digits/1", "lee/digits/1"}, "kim"},
        {"06_dataset_board", {"dataset", "board", "digits"}, "kim"},
    };
    std::string mismatches;
    for (const auto& step : steps) {
        if (step.name == "04_logs_tail") gw.run_until_idle();
        const auto r = gw.cli(step.args, step.user);
        const auto actual = "exit " + std::to_string(r.code) + "\n" + r.out + (r.err.empty() ? "" : "stderr:\n" + r.err);
        if (step.name == "05_plot") {
            // The goldens must also agree with the closed form, not just with themselves.
            const auto lines = split(r.out, '\n');
            for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
                const auto cells = split(lines[i], ',');
                const auto n = static_cast<std::int64_t>(i);
                if (cells.size() != 3 || *parse_real(cells[1]) != fixture::closed_form_loss(1.0, 0.1, n) ||
                    std::abs(*parse_real(cells[2]) - fixture::closed_form_loss(1.0, 0.3, n)) > 1e-12) {
                    mismatches += " 05_plot(row " + std::to_string(i) + " off the closed form)";
                    break;
                }
            }
        }
        const auto path = golden_dir / (step.name + ".out");
        if (update) {
            fs::create_directories(golden_dir);
            std::ofstream(path, std::ios::binary) << actual;
            continue;
        }
        if (!fs::exists(path)) {
            mismatches += " " + step.name + "(missing golden)";
        } else if (read_file(path) != actual) {
            mismatches += " " + step.name;
        }
    }
    fs::remove_all(work);
    if (!mismatches.empty()) return fail("output differs from golden:" + mismatches);
    return pass(update ? "goldens rewritten" : "push, run, logs --tail, plot, board match goldens byte for byte");
}

} // namespace

int main() {
    using namespace std::chrono_literals;
    const std::vector<Criterion> criteria{
        {"fragmentation", 1s, fragmentation},
        {"fast_path", 5s, fast_path},
        {"scheduler_safety", 30s, safety_and_ordering},
        {"failover", 30s, failover},
        {"resume_determinism", 10s, resume_determinism},
        {"tune_semantics", 1s, tune_semantics},
        {"leaderboard", 5s, leaderboard},
        {"storage", 10s, storage},
        {"cli_end_to_end", 10s, cli_end_to_end},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const auto elapsed = std::chrono::steady_clock::now() - start;
        if (o.pass && elapsed > c.limit) {
            o = fail("over time limit; " + o.detail);
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << seconds(elapsed) << " / limit "
                  << seconds(c.limit) << "]  " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
