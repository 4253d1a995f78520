#include <mlforge/session/session_manager.hpp>

#include <algorithm>
#include <random>

#include <mlforge/blobstore/archive.hpp>
#include <mlforge/common/error.hpp>
#include <mlforge/common/text.hpp>

namespace mlforge::session {

Hyperparams default_hyperparams() { return {{"lr", 0.1}, {"l0", 1.0}}; }

std::vector<Hyperparams> expand_sweep(const SweepRequest& request) {
    std::vector<Hyperparams> out;
    if (!request.grid.empty()) {
        if (!request.ranges.empty()) {
            throw Error(Errc::invalid_argument, "a sweep is either a grid or random ranges, not both");
        }
        out.emplace_back();
        // Keys iterate in sorted order; the last key varies fastest.
        for (const auto& [key, values] : request.grid) {
            if (values.empty()) {
                throw Error(Errc::empty_sweep, "grid key '" + key + "' has no values");
            }
            std::vector<Hyperparams> next;
            for (const auto& partial : out) {
                for (const auto& v : values) {
                    auto combo = partial;
                    combo[key] = v;
                    next.push_back(std::move(combo));
                }
            }
            out = std::move(next);
        }
        return out;
    }
    if (request.ranges.empty() || request.samples == 0) {
        throw Error(Errc::empty_sweep, "sweep needs a non-empty grid or ranges with samples >= 1");
    }
    std::mt19937_64 rng(request.seed);
    for (std::size_t i = 0; i < request.samples; ++i) {
        Hyperparams combo;
        for (const auto& [key, range] : request.ranges) {
            if (!(range.low <= range.high)) {
                throw Error(Errc::invalid_argument, "range for '" + key + "' is empty");
            }
            // 53 random bits scaled to [0, 1); avoids library-specific distributions.
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            combo[key] = range.low + u * (range.high - range.low);
        }
        out.push_back(std::move(combo));
    }
    return out;
}

namespace {

std::string describe_changes(const Hyperparams& before, const Hyperparams& changes) {
    std::string out;
    for (const auto& [key, value] : changes) {
        if (!out.empty()) {
            out += "; ";
        }
        out += key + ": " + format_hyperparam(before.at(key)) + " -> " + format_hyperparam(value);
    }
    return out.empty() ? "no changes" : out;
}

// Applies `changes` over `base`; keys must exist and keep their type.
Hyperparams merge_known(const Hyperparams& base, const Hyperparams& changes) {
    auto merged = base;
    for (const auto& [key, value] : changes) {
        auto it = merged.find(key);
        if (it == merged.end()) {
            throw Error(Errc::unknown_hyperparam, "unknown hyperparameter '" + key + "'");
        }
        if (it->second.index() != value.index()) {
            throw Error(Errc::invalid_argument, "hyperparameter '" + key + "' changes type");
        }
        it->second = value;
    }
    agent::initial_state(numeric_hyperparams(merged)).validate();
    return merged;
}

SessionState state_for(agent::RunState s) {
    switch (s) {
    case agent::RunState::running: return SessionState::running;
    case agent::RunState::paused: return SessionState::paused;
    case agent::RunState::finished: return SessionState::done;
    case agent::RunState::finished_by_user: return SessionState::stopped;
    case agent::RunState::failed: return SessionState::failed;
    }
    return SessionState::failed;
}

} // namespace

SessionManager::SessionManager(ClusterPort& cluster, store::BlobStore& blobs, store::DatasetCatalog& catalog,
                               store::CheckpointIndex& checkpoints, metrics::MetricsStore& metrics,
                               board::Leaderboard& board, const Clock& clock, std::size_t event_replay)
    : cluster_(cluster),
      blobs_(blobs),
      catalog_(catalog),
      checkpoints_(checkpoints),
      metrics_(metrics),
      board_(board),
      clock_(clock),
      event_replay_(event_replay) {}

SessionManager::Entry& SessionManager::find(const std::string& session_id) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw Error(Errc::unknown_session, "unknown session " + session_id);
    }
    return it->second;
}

const SessionManager::Entry& SessionManager::find(const std::string& session_id) const {
    return const_cast<SessionManager*>(this)->find(session_id);
}

const Session& SessionManager::get(const std::string& session_id) const { return find(session_id).session; }

std::vector<Session> SessionManager::list(const ListFilter& filter) const {
    std::vector<Session> out;
    for (const auto& id : order_) {
        const auto& s = sessions_.at(id).session;
        if ((filter.user && s.user != *filter.user) || (filter.dataset && s.dataset.name != *filter.dataset) ||
            (filter.state && s.state != *filter.state)) {
            continue;
        }
        out.push_back(s);
    }
    return out;
}

Session SessionManager::create(const CreateRequest& request) { return create_impl(request, std::nullopt); }

Session SessionManager::create_impl(const CreateRequest& request, const std::optional<std::string>& sweep_id) {
    if (request.user.empty() || request.user.find('/') != std::string::npos) {
        throw Error(Errc::invalid_argument, "user must be non-empty and contain no '/'");
    }
    if (request.entrypoint.empty()) {
        throw Error(Errc::invalid_argument, "entrypoint is required");
    }
    if (request.max_steps < 0 || request.checkpoint_interval < 1) {
        throw Error(Errc::invalid_argument, "max_steps must be >= 0 and checkpoint_interval >= 1");
    }
    const auto dataset = catalog_.resolve(request.dataset);
    if (request.code_archive.empty()) {
        throw Error(Errc::empty_code, "code bundle is empty");
    }
    const auto files = store::read_archive(request.code_archive);
    if (files.empty()) {
        throw Error(Errc::empty_code, "code bundle has no files");
    }
    if (std::none_of(files.begin(), files.end(), [&](const auto& f) { return f.path == request.entrypoint; })) {
        throw Error(Errc::invalid_argument, "entrypoint " + request.entrypoint + " is not in the code bundle");
    }
    auto hyperparams = default_hyperparams();
    for (const auto& [key, value] : request.hyperparams) {
        hyperparams[key] = value;
    }
    for (const char* key : {"lr", "l0"}) {
        if (!std::holds_alternative<double>(hyperparams.at(key))) {
            throw Error(Errc::invalid_argument, std::string("hyperparameter '") + key + "' must be a real");
        }
    }
    agent::initial_state(numeric_hyperparams(hyperparams)).validate();

    Session s;
    s.user = request.user;
    s.dataset = dataset;
    s.code_digest = blobs_.put_blob(request.code_archive);
    s.entrypoint = request.entrypoint;
    s.hyperparams = hyperparams;
    s.initial_hyperparams = hyperparams;
    s.priority = request.priority;
    s.sweep_id = sweep_id;
    s.resources = request.resources;
    s.max_steps = request.max_steps;
    s.checkpoint_interval = request.checkpoint_interval;
    s.environment = request.environment;
    s.seed = request.seed;
    return start(std::move(s));
}

Session SessionManager::start(Session s) {
    const auto key = s.user + "/" + s.dataset.name;
    const int number = session_counters_[key] + 1;
    s.session_id = key + "/" + std::to_string(number);
    s.created_at = clock_.now();
    s.state = SessionState::created;
    s.history = {HistoryEntry{s.created_at, "CREATED", ""}};
    if (s.start_state) {
        s.step = s.start_state->step;
    }

    // Submit first: a rejected or unroutable request leaves no session behind.
    const auto decision = cluster_.submit(
        sched::JobSpec{s.session_id, s.session_id, s.resources, s.priority, s.created_at});
    if (const auto* rejected = std::get_if<sched::Rejected>(&decision.outcome)) {
        throw Error(Errc::invalid_spec, "job rejected: " + rejected->reason);
    }
    session_counters_[key] = number;

    const auto id = s.session_id;
    metrics_.open_session(id);
    Entry entry;
    entry.session = std::move(s);
    entry.events = std::make_unique<Broadcaster<SessionEvent>>(1 << 16);
    auto& stored = sessions_.emplace(id, std::move(entry)).first->second;
    order_.push_back(id);

    if (decision.placed()) {
        transition(stored, SessionState::scheduled, "placed on " + decision.node_id());
        launch(stored, decision.node_id());
    } else {
        const auto& queued = std::get<sched::Queued>(decision.outcome);
        transition(stored, SessionState::queued, "queue position " + std::to_string(queued.position));
    }
    process_pending();
    return find(id).session;
}

void SessionManager::transition(Entry& entry, SessionState to, const std::string& detail) {
    auto& s = entry.session;
    if (!legal_transition(s.state, to)) {
        throw Error(Errc::illegal_state, "session " + s.session_id + " cannot go from " +
                                             std::string(to_string(s.state)) + " to " + std::string(to_string(to)));
    }
    s.state = to;
    const auto now = clock_.now();
    s.history.push_back(HistoryEntry{now, std::string(to_string(to)), detail});
    entry.events->publish(SessionEvent{"transition",
                                       {{"session_id", s.session_id},
                                        {"state", to_string(to)},
                                        {"detail", detail},
                                        {"at", format_timestamp(now)},
                                        {"step", s.step},
                                        {"terminal", is_terminal(to)}},
                                       is_terminal(to)});
    if (is_terminal(to)) {
        metrics_.set_accepting(s.session_id, false);
        metrics_.close_streams(s.session_id);
        blobs_.set_ref(metrics_archive_ref(s.session_id), blobs_.put_blob(metrics_.archive_jsonl(s.session_id)));
        entry.events->close();
        if (entry.holds_allocation) {
            entry.holds_allocation = false;
            pending_.push_back(s.session_id);
        }
    }
}

void SessionManager::note(Entry& entry, const std::string& what, const std::string& detail) {
    const auto now = clock_.now();
    entry.session.history.push_back(HistoryEntry{now, what, detail});
    entry.events->publish(SessionEvent{"transition",
                                       {{"session_id", entry.session.session_id},
                                        {"state", what},
                                        {"detail", detail},
                                        {"at", format_timestamp(now)},
                                        {"step", entry.session.step},
                                        {"terminal", false}},
                                       false});
}

void SessionManager::fail(Entry& entry, const std::string& detail) {
    if (legal_transition(entry.session.state, SessionState::failed)) {
        transition(entry, SessionState::failed, detail);
    }
}

agent::NodeAgent& SessionManager::agent_for(const Entry& entry) {
    const auto& s = entry.session;
    agent::NodeAgent* agent = s.node_id ? cluster_.agent(*s.node_id) : nullptr;
    if (!agent) {
        throw Error(Errc::resource_lost, "session " + s.session_id + " has no live node");
    }
    return *agent;
}

void SessionManager::launch(Entry& entry, const std::string& node_id) {
    auto& s = entry.session;
    s.node_id = node_id;
    entry.holds_allocation = true;
    agent::NodeAgent* agent = cluster_.agent(node_id);
    if (!agent) {
        fail(entry, "node " + node_id + " unknown");
        return;
    }
    try {
        agent::LaunchRequest req;
        req.session_id = s.session_id;
        req.code_digest = s.code_digest;
        req.env = agent->prepare_environment(s.environment);
        req.dataset = s.dataset;
        req.dataset_path = agent->mount_dataset(s.dataset, s.session_id);
        req.hyperparams = numeric_hyperparams(s.hyperparams);
        req.checkpoint = s.start_state;
        req.max_steps = s.max_steps;
        req.checkpoint_interval = s.checkpoint_interval;
        req.resources = s.resources;
        req.seed = s.seed;
        agent->launch(std::move(req));
    } catch (const Error& e) {
        agent->mounts().release(s.session_id);
        fail(entry, std::string(e.code_name()) + ": " + e.what());
    }
}

void SessionManager::on_placements(const std::vector<sched::PlacementDecision>& decisions) {
    for (const auto& d : decisions) {
        if (!d.placed()) {
            continue;
        }
        auto it = sessions_.find(d.job_id);
        if (it == sessions_.end() || it->second.session.state != SessionState::queued) {
            pending_.push_back(d.job_id);  // nothing to run; hand the resources back
            continue;
        }
        transition(it->second, SessionState::scheduled, "placed on " + d.node_id());
        launch(it->second, d.node_id());
    }
}

void SessionManager::process_pending() {
    while (!pending_.empty() || !pending_cancels_.empty()) {
        const bool cancel = !pending_cancels_.empty();
        auto& queue = cancel ? pending_cancels_ : pending_;
        const auto job = queue.front();
        std::vector<sched::PlacementDecision> placed;
        try {
            placed = cancel ? cluster_.cancel(job) : cluster_.complete(job);
        } catch (const Error& e) {
            if (e.code() == Errc::master_unavailable) {
                return;  // retried once a master is back
            }
            if (e.code() != Errc::unknown_job) {
                throw;
            }
        }
        queue.erase(queue.begin());
        on_placements(placed);
    }
}

void SessionManager::on_jobs_requeued(const std::vector<std::string>& job_ids) {
    for (const auto& job : job_ids) {
        pending_cancels_.push_back(job);
        auto it = sessions_.find(job);
        if (it == sessions_.end()) {
            continue;
        }
        auto& entry = it->second;
        entry.holds_allocation = false;  // the master already took the resources back
        fail(entry, "node " + entry.session.node_id.value_or("?") + " lost");
    }
    process_pending();
}

Session SessionManager::pause_and_tune(const std::string& session_id, const Hyperparams& changes) {
    auto& entry = find(session_id);
    if (entry.session.state != SessionState::running) {
        throw Error(Errc::illegal_state, "session " + session_id + " is " +
                                             std::string(to_string(entry.session.state)) + ", not RUNNING");
    }
    const auto merged = merge_known(entry.session.hyperparams, changes);
    auto& agent = agent_for(entry);
    const auto run = agent.find_run(session_id);
    if (!run) {
        throw Error(Errc::resource_lost, "no run for " + session_id + " on " + agent.node_id());
    }
    std::map<std::string, double> overrides;
    for (const auto& [key, value] : changes) {
        if (const auto* d = std::get_if<double>(&value)) {
            overrides[key] = *d;
        }
    }
    agent.control(*run, agent::ControlCommand::pause);
    note(entry, "TUNED", describe_changes(entry.session.hyperparams, changes));
    entry.session.hyperparams = merged;
    agent.control(*run, agent::ControlCommand::resume, overrides);
    process_pending();
    return entry.session;
}

Session SessionManager::fork(const std::string& parent_id, const store::CheckpointSelector& selector,
                             const Hyperparams& changes, const std::string& user,
                             std::optional<std::int64_t> max_steps) {
    const auto& parent = find(parent_id).session;
    const auto record = checkpoints_.get(parent_id, selector);
    auto state = agent::decode_checkpoint(checkpoints_.load_state(record));

    // Start from what the checkpoint ran with, not whatever the parent has now.
    auto base = parent.hyperparams;
    for (const auto& [key, value] : state.hyperparams) {
        base[key] = value;
    }
    Session child;
    child.user = user.empty() ? parent.user : user;
    child.dataset = parent.dataset;
    child.code_digest = parent.code_digest;
    child.entrypoint = parent.entrypoint;
    child.hyperparams = merge_known(base, changes);
    child.initial_hyperparams = child.hyperparams;
    child.priority = parent.priority;
    child.parent = ParentLink{parent_id, record.step};
    child.resources = parent.resources;
    child.max_steps = max_steps.value_or(parent.max_steps);
    child.checkpoint_interval = parent.checkpoint_interval;
    child.environment = parent.environment;
    child.seed = parent.seed;
    child.start_state = std::move(state);
    return start(std::move(child));
}

Session SessionManager::reproduce(const std::string& session_id, const std::string& user) {
    const auto& src = find(session_id).session;
    Session copy;
    copy.user = user.empty() ? src.user : user;
    copy.dataset = src.dataset;
    copy.code_digest = src.code_digest;
    copy.entrypoint = src.entrypoint;
    copy.hyperparams = src.initial_hyperparams;
    copy.initial_hyperparams = src.initial_hyperparams;
    copy.priority = src.priority;
    copy.parent = src.parent;
    copy.resources = src.resources;
    copy.max_steps = src.max_steps;
    copy.checkpoint_interval = src.checkpoint_interval;
    copy.environment = src.environment;
    copy.seed = src.seed;
    copy.start_state = src.start_state;
    return start(std::move(copy));
}

SweepResult SessionManager::run_sweep(const SweepRequest& request) {
    const auto combos = expand_sweep(request);
    const auto dataset = catalog_.resolve(request.base.dataset);
    const auto key = request.base.user + "/" + dataset.name;
    SweepResult result;
    result.sweep_id = key + "/sweep-" + std::to_string(++sweep_counters_[key]);
    for (const auto& combo : combos) {
        auto req = request.base;
        for (const auto& [k, v] : combo) {
            req.hyperparams[k] = v;
        }
        result.sessions.push_back(create_impl(req, result.sweep_id));
    }
    return result;
}

ScoreResult SessionManager::report_score(const std::string& session_id, double value) {
    return report_score(session_id, value, find(session_id).session.step);
}

ScoreResult SessionManager::report_score(const std::string& session_id, double value, std::int64_t step) {
    auto& entry = find(session_id);
    auto& s = entry.session;
    if (!catalog_.get(s.dataset).board_config) {
        throw Error(Errc::no_board_config, "dataset " + s.dataset.to_string() + " has no board config");
    }
    const auto now = clock_.now();
    entry.scores.push_back(ScoreEntry{step, value, now});
    const auto recorded = board_.record(board::ScoreReport{s.dataset, s.session_id, s.user, value, step, now, s.hyperparams});
    if (recorded.improved) {
        s.best_value = value;
        if (auto cp = checkpoints_.at_or_before(session_id, step)) {
            checkpoints_.set_best(session_id, cp->step);
            s.best_checkpoint_step = cp->step;
        }
    }
    return ScoreResult{recorded.improved, s.best_value, s.best_checkpoint_step};
}

const std::vector<ScoreEntry>& SessionManager::score_history(const std::string& session_id) const {
    return find(session_id).scores;
}

Session SessionManager::stop(const std::string& session_id) {
    auto& entry = find(session_id);
    switch (entry.session.state) {
    case SessionState::queued:
        on_placements(cluster_.cancel(session_id));
        transition(entry, SessionState::stopped, "stopped while queued");
        break;
    case SessionState::running:
    case SessionState::paused: {
        auto& agent = agent_for(entry);
        const auto run = agent.find_run(session_id);
        if (!run) {
            throw Error(Errc::resource_lost, "no run for " + session_id + " on " + agent.node_id());
        }
        agent.control(*run, agent::ControlCommand::stop);
        break;
    }
    default:
        throw Error(Errc::illegal_state,
                    "session " + session_id + " is " + std::string(to_string(entry.session.state)) + ", cannot stop");
    }
    process_pending();
    return entry.session;
}

std::shared_ptr<EventSubscription> SessionManager::subscribe(const std::string& session_id, std::size_t replay) {
    return find(session_id).events->subscribe(replay);
}

void SessionManager::on_metric(const metrics::MetricPoint& point) {
    auto it = sessions_.find(point.session_id);
    if (it == sessions_.end()) {
        return;
    }
    try {
        metrics_.log(point);
    } catch (const Error& e) {
        if (e.code() == Errc::duplicate_point) {
            return;  // redelivery
        }
        throw;
    }
    auto& s = it->second.session;
    s.step = std::max(s.step, point.step);
    it->second.events->publish(SessionEvent{"metric", metrics::to_json(point), false});
}

void SessionManager::on_checkpoint(const store::CheckpointRecord& record) {
    auto it = sessions_.find(record.session_id);
    if (it == sessions_.end()) {
        return;
    }
    const auto& s = it->second.session;
    const auto version = catalog_.get(s.dataset);
    if (!version.board_config) {
        return;
    }
    metrics::QueryOptions q;
    q.name = version.board_config->metric_name;
    q.from_step = record.step;
    q.to_step = record.step;
    const auto points = metrics_.query(s.session_id, q);
    if (!points.empty()) {
        report_score(s.session_id, points.back().value, record.step);
    }
}

void SessionManager::on_transition(const std::string& session_id, agent::RunState state, const std::string& detail) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        return;
    }
    auto& entry = it->second;
    const auto to = state_for(state);
    if (entry.session.state == to || !legal_transition(entry.session.state, to)) {
        return;  // duplicate or stale notification
    }
    transition(entry, to, detail);
}

} // namespace mlforge::session
