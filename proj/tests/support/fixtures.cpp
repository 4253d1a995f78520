#include "support/fixtures.hpp"

namespace mlforge::fixture {

Bytes code_archive(const std::string& entrypoint, const std::string& body) {
    return store::write_archive({store::ArchiveEntry{entrypoint, to_bytes(body)}});
}

std::vector<store::DatasetFile> dataset_files(const std::string& seed) {
    return {store::DatasetFile{"train/data.csv", to_bytes("a,b\n1,2\n" + seed)},
            store::DatasetFile{"test/data.csv", to_bytes("a,b\n3,4\n" + seed)}};
}

namespace {
platform::PlatformConfig cluster_config(int nodes, sched::Resources each) {
    platform::PlatformConfig cfg;
    cfg.nodes = platform::uniform_nodes(nodes, each);
    cfg.start_time = from_millis(1'767'225'600'000);  // 2026-01-01T00:00:00Z
    return cfg;
}
} // namespace

TestCluster::TestCluster(int nodes, sched::Resources each, bool board) : platform(cluster_config(nodes, each)) {
    std::optional<store::BoardConfig> cfg;
    if (board) {
        cfg = store::BoardConfig{"acc", store::Direction::maximize};
    }
    platform.catalog().push("mnist", dataset_files(), cfg);
}

session::CreateRequest TestCluster::request(const std::string& user, Hyperparams hp, std::int64_t max_steps) const {
    session::CreateRequest r;
    r.user = user;
    r.dataset = store::DatasetRef{"mnist", 0};
    r.code_archive = code_archive();
    r.entrypoint = "main.py";
    r.hyperparams = std::move(hp);
    r.max_steps = max_steps;
    return r;
}

} // namespace mlforge::fixture
