#include <mlforge/leaderboard/leaderboard.hpp>

#include <algorithm>
#include <set>

#include <mlforge/common/error.hpp>
#include <mlforge/common/text.hpp>

namespace mlforge::board {

nlohmann::json to_json(const LeaderboardEntry& e) {
    return nlohmann::json{{"rank", e.rank},
                          {"dataset", e.dataset.to_string()},
                          {"session_id", e.session_id},
                          {"user", e.user},
                          {"metric", e.metric_name},
                          {"best_value", e.best_value},
                          {"step", e.step},
                          {"achieved_at", format_timestamp(e.achieved_at)},
                          {"hyperparams", hyperparams_to_json(e.hyperparams)}};
}

nlohmann::json board_to_json(const std::vector<LeaderboardEntry>& entries) {
    auto out = nlohmann::json::array();
    for (const auto& e : entries) {
        out.push_back(to_json(e));
    }
    return out;
}

std::string format_board(const std::vector<LeaderboardEntry>& entries) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : entries) {
        rows.push_back({std::to_string(e.rank), e.session_id, e.user, format_real(e.best_value),
                        format_timestamp(e.achieved_at)});
    }
    return format_table({"RANK", "SESSION", "USER", "VALUE", "ACHIEVED_AT"}, rows);
}

Leaderboard::Leaderboard(store::DatasetCatalog& catalog) : catalog_(catalog) {}

RecordResult Leaderboard::record(const ScoreReport& report) {
    const auto version = catalog_.get(report.dataset);
    if (!version.board_config) {
        throw Error(Errc::no_board_config, "dataset " + version.ref().to_string() + " has no board config");
    }
    const auto& cfg = *version.board_config;
    std::lock_guard lock(mutex_);
    auto& board = entries_[version.ref()];
    auto it = board.find(report.session_id);
    if (it != board.end() && !store::improves(cfg.direction, report.value, it->second.best_value)) {
        return {it->second, false};
    }
    LeaderboardEntry entry{version.ref(), report.session_id, report.user, cfg.metric_name, report.value,
                           report.step,   report.at,         report.hyperparams, 0};
    board.insert_or_assign(report.session_id, entry);
    return {entry, true};
}

std::vector<LeaderboardEntry> Leaderboard::board(const store::DatasetRef& dataset, std::optional<std::size_t> top_k,
                                                 bool best_per_user) const {
    const auto version = catalog_.get(dataset);
    const auto direction = version.board_config ? version.board_config->direction : store::Direction::maximize;
    std::vector<LeaderboardEntry> out;
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(version.ref()); it != entries_.end()) {
            for (const auto& [id, e] : it->second) {
                out.push_back(e);
            }
        }
    }
    std::sort(out.begin(), out.end(), [&](const LeaderboardEntry& a, const LeaderboardEntry& b) {
        if (a.best_value != b.best_value) {
            return store::improves(direction, a.best_value, b.best_value);
        }
        return std::tie(a.achieved_at, a.session_id) < std::tie(b.achieved_at, b.session_id);
    });
    if (best_per_user) {
        std::set<std::string> seen;
        std::erase_if(out, [&](const LeaderboardEntry& e) { return !seen.insert(e.user).second; });
    }
    if (top_k && *top_k < out.size()) {
        out.resize(*top_k);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rank = static_cast<int>(i + 1);
    }
    return out;
}

void Leaderboard::set_board_config(const store::DatasetRef& dataset, const store::BoardConfig& config) {
    const auto version = catalog_.get(dataset);
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(version.ref()); it != entries_.end() && !it->second.empty()) {
        if (version.board_config == config) {
            return;
        }
        throw Error(Errc::config_locked, "board for " + version.ref().to_string() + " already has scores");
    }
    catalog_.set_board_config(version.ref(), config);
}

std::optional<store::BoardConfig> Leaderboard::config(const store::DatasetRef& dataset) const {
    return catalog_.get(dataset).board_config;
}

} // namespace mlforge::board
