#include <gtest/gtest.h>

#include <mlforge/common/error.hpp>

#include "support/fixtures.hpp"

using namespace mlforge;
using fixture::TestCluster;

TEST(Platform, HeartbeatsKeepNodesAlive) {
    TestCluster c(3);
    c.platform.run_ticks(30);
    for (const auto& [id, node] : c.platform.scheduler().state().registry) {
        EXPECT_TRUE(node.alive) << id;
    }
    EXPECT_GT(c.platform.agents()[0]->last_event_seq(), 0u);
}

TEST(Platform, MasterCrashMeansUnavailableUntilElection) {
    platform::PlatformConfig cfg;
    cfg.nodes = platform::uniform_nodes(3, {8, 32, 65536});
    cfg.auto_failover = false;
    platform::Platform p(cfg);
    p.catalog().push("mnist", fixture::dataset_files());
    const auto first_term = p.scheduler().term();
    EXPECT_EQ(p.scheduler().leader_id(), "node-2");
    p.crash_master();
    EXPECT_FALSE(p.master_available());
    try {
        p.scheduler();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::master_unavailable);
    }
    auto r = p.failover();
    EXPECT_EQ(r.term, first_term + 1);
    EXPECT_TRUE(p.master_available());
}

TEST(Platform, RunsSurviveMasterFailover) {
    TestCluster c(3);
    auto s = c.platform.sessions().create(c.request("kim", {}, 20));
    c.platform.run_ticks(5);
    const auto before = c.platform.scheduler().state().allocations;
    c.platform.kill_node(c.platform.scheduler().leader_id() == *c.platform.sessions().get(s.session_id).node_id
                             ? "node-0"
                             : c.platform.scheduler().leader_id());
    c.platform.run_until_idle();
    EXPECT_EQ(c.platform.sessions().get(s.session_id).state, session::SessionState::done);
    EXPECT_TRUE(c.platform.scheduler().state().allocations.empty());
    EXPECT_FALSE(before.empty());
}

TEST(Platform, RevivedNodeTakesWorkAgain) {
    TestCluster c(1, {1, 32, 65536});
    c.platform.kill_node("node-0");
    EXPECT_FALSE(c.platform.master_available() && c.platform.scheduler().leader_id() == "node-0");
}
