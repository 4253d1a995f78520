#include <mlforge/gateway/router.hpp>

#include <charconv>

#include <nlohmann/json.hpp>

#include <mlforge/agent/sim_trainer.hpp>
#include <mlforge/common/text.hpp>

namespace mlforge::gateway {

using nlohmann::json;

int status_for(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument:
    case Errc::invalid_spec:
    case Errc::empty_dataset:
    case Errc::duplicate_path:
    case Errc::unknown_hyperparam:
    case Errc::empty_code:
    case Errc::empty_sweep:
    case Errc::empty_directory:
        return 400;
    case Errc::not_found:
    case Errc::unknown_node:
    case Errc::unknown_job:
    case Errc::unknown_session:
    case Errc::unknown_dataset:
    case Errc::unknown_run:
    case Errc::no_checkpoint:
        return 404;
    case Errc::duplicate_node_conflict:
    case Errc::non_monotonic_step:
    case Errc::illegal_transition:
    case Errc::illegal_state:
    case Errc::no_board_config:
    case Errc::config_locked:
    case Errc::duplicate_point:
    case Errc::out_of_order_step:
        return 409;
    case Errc::not_master:
    case Errc::no_candidates:
    case Errc::master_unavailable:
        return 503;
    case Errc::storage_full:
        return 507;
    case Errc::corrupt_log:
    case Errc::build_failed:
    case Errc::missing_code_bundle:
    case Errc::resource_lost:
        return 500;
    }
    return 500;
}

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
    ApiResponse r;
    r.status = status;
    r.body = json{{"code", code}, {"message", message}}.dump() + "\n";
    return r;
}

const std::vector<RouteInfo>& route_table() {
    static const std::vector<RouteInfo> table{
        {"POST", "/v1/datasets"},
        {"GET", "/v1/datasets"},
        {"GET", "/v1/datasets/{name}/{version}/board"},
        {"POST", "/v1/sessions"},
        {"GET", "/v1/sessions"},
        {"GET", "/v1/sessions/{id}"},
        {"POST", "/v1/sessions/{id}/tune"},
        {"POST", "/v1/sessions/{id}/stop"},
        {"POST", "/v1/sessions/{id}/fork"},
        {"POST", "/v1/sessions/{id}/reproduce"},
        {"POST", "/v1/sessions/{id}/infer"},
        {"GET", "/v1/sessions/{id}/logs"},
        {"GET", "/v1/sessions/{id}/plot.csv"},
        {"GET", "/v1/sessions/{id}/events"},
        {"GET", "/v1/cluster"},
        {"POST", "/v1/sweeps"},
    };
    return table;
}

std::string sse_frame(const session::SessionEvent& event) {
    return "event: " + event.kind + "\ndata: " + event.data.dump() + "\n\n";
}

namespace {

struct NotFound {};

ApiResponse ok(int status, const json& body) {
    ApiResponse r;
    r.status = status;
    r.body = body.dump() + "\n";
    return r;
}

json parse_body(const ApiRequest& r) {
    if (r.body.empty()) {
        return json::object();
    }
    try {
        auto j = json::parse(r.body);
        if (!j.is_object()) {
            throw Error(Errc::invalid_argument, "request body must be a JSON object");
        }
        return j;
    } catch (const json::parse_error& e) {
        throw Error(Errc::invalid_argument, std::string("malformed JSON body: ") + e.what());
    }
}

std::int64_t parse_int(const std::string& text, const char* what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw Error(Errc::invalid_argument, std::string(what) + " must be an integer: " + text);
    }
    return v;
}

std::optional<std::string> query(const ApiRequest& r, const std::string& key) {
    auto it = r.query.find(key);
    if (it == r.query.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string user_of(const ApiRequest& r) {
    auto it = r.headers.find(kUserHeader);
    return it == r.headers.end() || it->second.empty() ? kDefaultUser : it->second;
}

Bytes decode_b64(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw Error(Errc::invalid_argument, std::string("field '") + field + "' must be a base64 string");
    }
    auto bytes = base64_decode(j.at(field).get<std::string>());
    if (!bytes) {
        throw Error(Errc::invalid_argument, std::string("field '") + field + "' is not valid base64");
    }
    return *bytes;
}

Hyperparams hyperparams_field(const json& body, const char* field = "hyperparams") {
    if (!body.contains(field)) {
        return {};
    }
    return hyperparams_from_json(body.at(field));
}

template <class T>
T field_or(const json& body, const char* field, T fallback) {
    if (!body.contains(field) || body.at(field).is_null()) {
        return fallback;
    }
    try {
        return body.at(field).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::invalid_argument, std::string("field '") + field + "' has the wrong type");
    }
}

session::CreateRequest create_request(const json& body, const std::string& user) {
    session::CreateRequest r;
    r.user = user;
    r.dataset = store::DatasetRef::parse(field_or<std::string>(body, "dataset", ""));
    r.entrypoint = field_or<std::string>(body, "entrypoint", "");
    r.code_archive = decode_b64(body, "code");
    r.hyperparams = hyperparams_field(body);
    r.priority = field_or<int>(body, "priority", 0);
    if (body.contains("resources")) {
        const auto& res = body.at("resources");
        r.resources = sched::Resources{field_or<std::int64_t>(res, "gpus", r.resources.gpus),
                                       field_or<std::int64_t>(res, "cpus", r.resources.cpus),
                                       field_or<std::int64_t>(res, "mem_mb", r.resources.mem_mb)};
    }
    r.max_steps = field_or<std::int64_t>(body, "max_steps", r.max_steps);
    r.checkpoint_interval = field_or<std::int64_t>(body, "checkpoint_interval", r.checkpoint_interval);
    if (body.contains("environment")) {
        const auto& env = body.at("environment");
        r.environment.base_image = field_or<std::string>(env, "base_image", r.environment.base_image);
        // {"numpy": "1.16"} or [["numpy", "1.16"]]
        const auto packages = field_or<json>(env, "packages", json::array());
        if (packages.is_object()) {
            for (const auto& [name, version] : packages.items()) {
                r.environment.packages.emplace_back(name, version.get<std::string>());
            }
        } else {
            r.environment.packages = field_or<std::vector<std::pair<std::string, std::string>>>(env, "packages", {});
        }
    }
    r.seed = field_or<std::uint64_t>(body, "seed", 0);
    return r;
}

json sessions_json(const std::vector<session::Session>& sessions) {
    auto out = json::array();
    for (const auto& s : sessions) {
        out.push_back(session::to_json(s));
    }
    return out;
}

json cluster_json(platform::Platform& p) {
    const auto& master = p.scheduler();
    const auto& state = master.state();
    auto nodes = json::array();
    for (const auto& [id, node] : state.registry) {
        auto jobs = json::array();
        for (const auto& [job, alloc] : state.allocations) {
            if (alloc.node_id == id) {
                jobs.push_back(job);
            }
        }
        nodes.push_back({{"node_id", id},
                         {"alive", node.alive},
                         {"total", sched::to_json(node.descriptor.total)},
                         {"free", sched::to_json(node.free())},
                         {"jobs", std::move(jobs)}});
    }
    auto queue = json::array();
    for (std::size_t i = 0; i < state.queue.size(); ++i) {
        const auto& q = state.queue[i];
        queue.push_back({{"position", i},
                         {"job_id", q.spec.job_id},
                         {"priority", q.spec.priority},
                         {"requeued", q.requeued},
                         {"request", sched::to_json(q.spec.request)}});
    }
    return json{{"term", master.term()},
                {"leader", master.leader_id()},
                {"event_log_seq", state.event_log_seq},
                {"nodes", std::move(nodes)},
                {"queue", std::move(queue)}};
}

} // namespace

Router::Router(platform::Platform& platform) : platform_(platform) {}

std::shared_ptr<session::EventSubscription> Router::open_stream(const std::string& session_id,
                                                                std::size_t replay) {
    std::lock_guard lock(platform_.mutex());
    return platform_.sessions().subscribe(session_id, replay);
}

ApiResponse Router::route(const ApiRequest& request) {
    const bool mutating = request.method == "POST" || request.method == "PUT" || request.method == "DELETE";
    std::string key;
    if (mutating) {
        if (auto it = request.headers.find(kIdempotencyHeader); it != request.headers.end() && !it->second.empty()) {
            key = user_of(request) + "\n" + request.method + " " + request.path + "\n" + it->second;
            std::lock_guard lock(idempotency_mutex_);
            if (auto hit = idempotent_.find(key); hit != idempotent_.end()) {
                return hit->second;
            }
        }
    }
    ApiResponse response;
    try {
        std::lock_guard lock(platform_.mutex());
        response = dispatch(request);
    } catch (const Error& e) {
        response = error_response(status_for(e.code()), e.code_name(), e.what());
    } catch (const NotFound&) {
        response = error_response(404, "not_found", "no route for " + request.method + " " + request.path);
    } catch (const std::exception& e) {
        response = error_response(500, "internal", e.what());
    }
    // Only definite outcomes are remembered; a 503 should be retried for real.
    if (!key.empty() && response.status < 500) {
        std::lock_guard lock(idempotency_mutex_);
        idempotent_.emplace(key, response);
    }
    return response;
}

ApiResponse Router::dispatch(const ApiRequest& r) {
    const auto segs = split(r.path, '/');
    // split("/v1/x") yields "", "v1", "x"
    if (segs.size() < 3 || !segs[0].empty() || segs[1] != "v1") {
        throw NotFound{};
    }
    const std::string& resource = segs[2];
    const std::vector<std::string> rest(segs.begin() + 3, segs.end());
    const bool get = r.method == "GET";
    const bool post = r.method == "POST";
    if (!get && !post) {
        throw NotFound{};
    }

    if (resource != "datasets" && resource != "sessions" && resource != "cluster" && resource != "sweeps") {
        throw NotFound{};
    }
    if (!platform_.master_available()) {
        throw Error(Errc::master_unavailable, "master unavailable: election in progress");
    }
    auto& p = platform_;

    if (resource == "datasets") {
        if (rest.empty() && post) {
            const auto body = parse_body(r);
            std::vector<store::DatasetFile> files;
            for (const auto& f : field_or<json>(body, "files", json::array())) {
                files.push_back(store::DatasetFile{field_or<std::string>(f, "path", ""), decode_b64(f, "data")});
            }
            std::optional<store::BoardConfig> board;
            if (body.contains("board") && !body.at("board").is_null()) {
                const auto& b = body.at("board");
                board = store::BoardConfig{field_or<std::string>(b, "metric", ""),
                                           store::parse_direction(field_or<std::string>(b, "direction", "maximize"))};
                if (board->metric_name.empty()) {
                    throw Error(Errc::invalid_argument, "board needs a metric name");
                }
            }
            return ok(201, store::to_json(p.catalog().push(field_or<std::string>(body, "name", ""), files, board)));
        }
        if (rest.empty() && get) {
            auto out = json::array();
            for (const auto& v : p.catalog().list(query(r, "name"))) {
                out.push_back(store::to_json(v));
            }
            return ok(200, out);
        }
        if (rest.size() == 3 && rest[2] == "board" && get) {
            const int version = rest[1] == "latest" ? 0 : static_cast<int>(parse_int(rest[1], "version"));
            std::optional<std::size_t> top_k;
            if (auto k = query(r, "top_k")) {
                top_k = static_cast<std::size_t>(parse_int(*k, "top_k"));
            }
            const bool per_user = query(r, "best_per_user").value_or("false") == "true";
            return ok(200, board::board_to_json(p.leaderboard().board({rest[0], version}, top_k, per_user)));
        }
        throw NotFound{};
    }

    if (resource == "cluster" && rest.empty() && get) {
        return ok(200, cluster_json(p));
    }

    if (resource == "sweeps" && rest.empty() && post) {
        const auto body = parse_body(r);
        session::SweepRequest sweep;
        sweep.base = create_request(body, user_of(r));
        if (body.contains("grid")) {
            for (const auto& [k, values] : body.at("grid").items()) {
                auto& list = sweep.grid[k];
                for (const auto& v : values) {
                    list.push_back(v.is_number() ? HyperValue(v.get<double>()) : HyperValue(v.get<std::string>()));
                }
            }
        }
        if (body.contains("random")) {
            const auto& rnd = body.at("random");
            for (const auto& [k, range] : field_or<json>(rnd, "ranges", json::object()).items()) {
                if (!range.is_array() || range.size() != 2) {
                    throw Error(Errc::invalid_argument, "range for '" + k + "' must be [low, high]");
                }
                sweep.ranges[k] = session::RandomRange{range[0].get<double>(), range[1].get<double>()};
            }
            sweep.samples = field_or<std::size_t>(rnd, "samples", 0);
            sweep.seed = field_or<std::uint64_t>(rnd, "seed", 0);
        }
        const auto result = p.sessions().run_sweep(sweep);
        return ok(201, json{{"sweep_id", result.sweep_id}, {"sessions", sessions_json(result.sessions)}});
    }

    if (resource != "sessions") {
        throw NotFound{};
    }
    auto& sm = p.sessions();
    if (rest.empty()) {
        if (post) {
            return ok(201, session::to_json(sm.create(create_request(parse_body(r), user_of(r)))));
        }
        session::ListFilter filter;
        filter.user = query(r, "user");
        filter.dataset = query(r, "dataset");
        if (auto st = query(r, "state")) {
            filter.state = session::parse_state(*st);
        }
        return ok(200, sessions_json(sm.list(filter)));
    }
    // Session ids are user/dataset/number: three path segments.
    if (rest.size() != 3 && rest.size() != 4) {
        throw NotFound{};
    }
    const std::string id = rest[0] + "/" + rest[1] + "/" + rest[2];
    const std::string action = rest.size() == 4 ? rest[3] : "";

    if (action.empty() && get) {
        return ok(200, session::to_json(sm.get(id)));
    }
    if (action == "tune" && post) {
        return ok(200, session::to_json(sm.pause_and_tune(id, hyperparams_field(parse_body(r)))));
    }
    if (action == "stop" && post) {
        return ok(200, session::to_json(sm.stop(id)));
    }
    if (action == "fork" && post) {
        const auto body = parse_body(r);
        const auto selector = store::CheckpointSelector::parse(field_or<std::string>(body, "checkpoint", "latest"));
        std::optional<std::int64_t> max_steps;
        if (body.contains("max_steps") && !body.at("max_steps").is_null()) {
            max_steps = field_or<std::int64_t>(body, "max_steps", 0);
        }
        return ok(201, session::to_json(sm.fork(id, selector, hyperparams_field(body), user_of(r), max_steps)));
    }
    if (action == "reproduce" && post) {
        return ok(201, session::to_json(sm.reproduce(id, user_of(r))));
    }
    if (action == "infer" && post) {
        const auto body = parse_body(r);
        sm.get(id);
        const auto selector = store::CheckpointSelector::parse(field_or<std::string>(body, "checkpoint", "latest"));
        const auto record = p.checkpoints().get(id, selector);
        const auto state = agent::decode_checkpoint(p.checkpoints().load_state(record));
        const auto prediction = agent::infer(state, decode_b64(body, "input"));
        return ok(200, json{{"session_id", id},
                            {"checkpoint_step", record.step},
                            {"label", prediction.label},
                            {"confidence", prediction.confidence}});
    }
    if (action == "logs" && get) {
        metrics::QueryOptions q;
        q.name = query(r, "name");
        if (auto v = query(r, "from")) q.from_step = parse_int(*v, "from");
        if (auto v = query(r, "to")) q.to_step = parse_int(*v, "to");
        if (auto v = query(r, "tail")) q.tail = static_cast<std::size_t>(parse_int(*v, "tail"));
        sm.get(id);
        auto out = json::array();
        for (const auto& pt : p.metrics().query(id, q)) {
            out.push_back(metrics::to_json(pt));
        }
        return ok(200, out);
    }
    if (action == "plot.csv" && get) {
        std::vector<std::string> ids{id};
        if (auto more = query(r, "compare"); more && !more->empty()) {
            for (auto& other : split(*more, ',')) {
                ids.push_back(other);
            }
        }
        for (const auto& s : ids) {
            sm.get(s);
        }
        ApiResponse csv;
        csv.body = p.metrics().export_csv(ids, query(r, "metric").value_or("loss"));
        csv.content_type = "text/csv";
        return csv;
    }
    if (action == "events" && get) {
        sm.get(id);
        ApiResponse stream;
        stream.content_type = "text/event-stream";
        stream.stream_session = id;
        if (auto v = query(r, "replay")) {
            stream.stream_replay = static_cast<std::size_t>(parse_int(*v, "replay"));
        }
        return stream;
    }
    throw NotFound{};
}

} // namespace mlforge::gateway
