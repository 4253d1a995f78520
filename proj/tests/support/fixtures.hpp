#pragma once

#include <map>
#include <string>
#include <vector>

#include <mlforge/blobstore/archive.hpp>
#include <mlforge/blobstore/dataset_catalog.hpp>
#include <mlforge/platform/platform.hpp>
#include <mlforge/session/session_manager.hpp>

namespace mlforge::fixture {

/// A one-file code bundle with the given entrypoint.
Bytes code_archive(const std::string& entrypoint = "main.py", const std::string& body = "print('hi')\n");

std::vector<store::DatasetFile> dataset_files(const std::string& seed = "x");

/// Cluster of `nodes` uniform nodes with a dataset "mnist" pushed (acc, maximize).
struct TestCluster {
    explicit TestCluster(int nodes = 3, sched::Resources each = {8, 32, 65536}, bool board = true);

    session::CreateRequest request(const std::string& user = "kim", Hyperparams hp = {},
                                   std::int64_t max_steps = 100) const;

    platform::Platform platform;
};

/// loss after `step` steps with a fixed lr from zero progress.
inline double closed_form_loss(double l0, double lr, std::int64_t step) {
    return l0 / (1.0 + lr * static_cast<double>(step));
}

} // namespace mlforge::fixture
