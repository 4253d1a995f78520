#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <mlforge/blobstore/dataset_catalog.hpp>
#include <mlforge/common/clock.hpp>
#include <mlforge/common/hyperparams.hpp>

namespace mlforge::board {

struct ScoreReport {
    store::DatasetRef dataset;
    std::string session_id;
    std::string user;
    double value = 0.0;
    std::int64_t step = 0;
    Timestamp at;
    Hyperparams hyperparams;
};

struct LeaderboardEntry {
    store::DatasetRef dataset;
    std::string session_id;
    std::string user;
    std::string metric_name;
    double best_value = 0.0;
    std::int64_t step = 0;
    Timestamp achieved_at;
    Hyperparams hyperparams;  // as of the best report
    int rank = 0;             // filled in by board()

    bool operator==(const LeaderboardEntry&) const = default;
};

nlohmann::json to_json(const LeaderboardEntry& e);
nlohmann::json board_to_json(const std::vector<LeaderboardEntry>& entries);
/// RANK  SESSION  USER  VALUE  ACHIEVED_AT
std::string format_board(const std::vector<LeaderboardEntry>& entries);

struct RecordResult {
    LeaderboardEntry entry;
    bool improved = false;
};

/// Per-dataset-version ranking of sessions by their best reported score.
class Leaderboard {
public:
    explicit Leaderboard(store::DatasetCatalog& catalog);

    /// Throws Error(unknown_dataset) or Error(no_board_config).
    RecordResult record(const ScoreReport& report);

    /// Best first; ties by earlier achieved_at, then session id.
    /// `best_per_user` keeps only each user's top entry.
    std::vector<LeaderboardEntry> board(const store::DatasetRef& dataset, std::optional<std::size_t> top_k = {},
                                        bool best_per_user = false) const;

    /// Throws Error(config_locked) if scores exist and the config differs.
    void set_board_config(const store::DatasetRef& dataset, const store::BoardConfig& config);

    std::optional<store::BoardConfig> config(const store::DatasetRef& dataset) const;

private:
    store::DatasetCatalog& catalog_;
    mutable std::mutex mutex_;
    std::map<store::DatasetRef, std::map<std::string, LeaderboardEntry>> entries_;
};

} // namespace mlforge::board
