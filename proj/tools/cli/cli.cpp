#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <mlforge/blobstore/dataset_catalog.hpp>
#include <mlforge/common/error.hpp>
#include <mlforge/common/hyperparams.hpp>
#include <mlforge/common/text.hpp>

#include "package.hpp"

namespace mlforge::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<CommandRoute>& command_routes() {
    static const std::vector<CommandRoute> table{
        {"run", "POST", "/v1/sessions"},
        {"sweep", "POST", "/v1/sweeps"},
        {"dataset push", "POST", "/v1/datasets"},
        {"dataset list", "GET", "/v1/datasets"},
        {"dataset board", "GET", "/v1/datasets/{name}/{version}/board"},
        {"logs", "GET", "/v1/sessions/{id}/logs"},
        {"logs --follow", "GET", "/v1/sessions/{id}/events"},
        {"plot", "GET", "/v1/sessions/{id}/plot.csv"},
        {"session list", "GET", "/v1/sessions"},
        {"session get", "GET", "/v1/sessions/{id}"},
        {"session stop", "POST", "/v1/sessions/{id}/stop"},
        {"session fork", "POST", "/v1/sessions/{id}/fork"},
        {"session tune", "POST", "/v1/sessions/{id}/tune"},
        {"session reproduce", "POST", "/v1/sessions/{id}/reproduce"},
        {"infer", "POST", "/v1/sessions/{id}/infer"},
        {"cluster", "GET", "/v1/cluster"},
    };
    return table;
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RemoteError : std::runtime_error {
    RemoteError(std::string c, const std::string& message) : std::runtime_error(message), code(std::move(c)) {}
    std::string code;
};

std::string random_key() {
    std::random_device rd;
    std::uniform_int_distribution<std::uint32_t> dist;
    std::string key;
    for (int i = 0; i < 4; ++i) {
        char buf[9];
        std::snprintf(buf, sizeof buf, "%08x", dist(rd));
        key += buf;
    }
    return key;
}

/// Gateway error bodies are {code, message}; anything else is reported as is.
[[noreturn]] void raise_remote(const HttpResult& r) {
    try {
        const auto j = json::parse(r.body);
        throw RemoteError(j.at("code").get<std::string>(), j.at("message").get<std::string>());
    } catch (const json::exception&) {
        throw RemoteError("http_" + std::to_string(r.status), r.body);
    }
}

struct Context {
    std::string endpoint = kDefaultEndpoint;
    std::string user = "user";
    std::string output = "text";
    std::ostream& out;
    std::ostream& err;
    const TransportFactory& factory;
    std::unique_ptr<Transport> transport;

    bool json_output() const { return output == "json"; }

    Headers headers() const { return {{"X-MLForge-User", user}}; }

    Transport& conn() {
        if (!transport) {
            transport = factory(endpoint);
        }
        return *transport;
    }

    std::string get(const std::string& path, const Query& query = {}) {
        auto r = conn().send("GET", path, query, headers(), "");
        if (r.status >= 400) {
            raise_remote(r);
        }
        return r.body;
    }

    /// Mutations carry an idempotency key so a retry after a dropped
    /// connection cannot apply twice.
    std::string post(const std::string& path, const json& body) {
        auto h = headers();
        h["Idempotency-Key"] = random_key();
        const auto payload = body.dump();
        HttpResult r;
        try {
            r = conn().send("POST", path, {}, h, payload);
        } catch (const ConnectionError&) {
            r = conn().send("POST", path, {}, h, payload);
        }
        if (r.status >= 400) {
            raise_remote(r);
        }
        return r.body;
    }

    /// Prints the raw body in json mode; returns true if it did.
    bool raw(const std::string& body) {
        if (json_output()) {
            out << body;
        }
        return json_output();
    }
};

void check_session_id(const std::string& id) {
    const auto parts = split(id, '/');
    if (parts.size() != 3 || parts[0].empty() || parts[1].empty() || parts[2].empty()) {
        throw UsageError("session id must look like user/dataset/N: " + id);
    }
}

std::string session_path(const std::string& id, const std::string& action = "") {
    check_session_id(id);
    return "/v1/sessions/" + id + (action.empty() ? "" : "/" + action);
}

json hyperparams_json(const std::vector<std::string>& assignments) {
    Hyperparams hp;
    for (const auto& a : assignments) {
        auto [k, v] = parse_hyperparam(a);
        hp[k] = v;
    }
    return hyperparams_to_json(hp);
}

std::string hyperparams_text(const json& j) {
    std::string out;
    for (const auto& [k, v] : hyperparams_from_json(j)) {
        out += (out.empty() ? "" : " ") + k + "=" + format_hyperparam(v);
    }
    return out;
}

std::string real_text(const json& j) { return j.is_null() ? "-" : format_real(j.get<double>()); }

std::string point_line(const json& p) {
    return p.at("at").get<std::string>() + " step=" + std::to_string(p.at("step").get<std::int64_t>()) + " " +
           p.at("name").get<std::string>() + "=" + real_text(p.at("value")) + "\n";
}

std::string key_values(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::size_t width = 0;
    for (const auto& [k, v] : rows) {
        width = std::max(width, k.size());
    }
    std::string out;
    for (const auto& [k, v] : rows) {
        out += k + std::string(width - k.size() + 2, ' ') + v + "\n";
    }
    return out;
}

struct RunOptions {
    std::string entrypoint;
    std::string dataset;
    std::vector<std::string> hp;
    int priority = 0;
    std::int64_t max_steps = 100;
    std::int64_t checkpoint_interval = 5;
    std::int64_t gpus = 1;
    std::int64_t cpus = 1;
    std::int64_t mem_mb = 1024;
    std::string dir = ".";
    std::string base_image;
    std::vector<std::string> packages;
    std::uint64_t seed = 0;

    void add_to(CLI::App& cmd) {
        cmd.add_option("entrypoint", entrypoint, "Script to run, relative to --dir")->required();
        cmd.add_option("-d,--dataset", dataset, "Dataset name, optionally name@version")->required();
        cmd.add_option("--hp", hp, "Hyperparameter key=value (repeatable)");
        cmd.add_option("--priority", priority, "Scheduling priority");
        cmd.add_option("--max-steps", max_steps, "Steps to train")->check(CLI::NonNegativeNumber);
        cmd.add_option("--checkpoint-interval", checkpoint_interval, "Steps between checkpoints")
            ->check(CLI::PositiveNumber);
        cmd.add_option("--gpus", gpus, "GPUs to request")->check(CLI::NonNegativeNumber);
        cmd.add_option("--cpus", cpus, "CPUs to request")->check(CLI::NonNegativeNumber);
        cmd.add_option("--mem-mb", mem_mb, "Memory to request in MiB")->check(CLI::NonNegativeNumber);
        cmd.add_option("--dir", dir, "Directory to package");
        cmd.add_option("--base-image", base_image, "Environment base image");
        cmd.add_option("--package", packages, "Environment package name==version (repeatable)");
        cmd.add_option("--seed", seed, "Trainer seed");
    }

    json body() const {
        const auto pkg = package_code(dir);
        json j{{"dataset", dataset},
               {"entrypoint", entrypoint},
               {"code", base64_encode(pkg.archive)},
               {"hyperparams", hyperparams_json(hp)},
               {"priority", priority},
               {"max_steps", max_steps},
               {"checkpoint_interval", checkpoint_interval},
               {"resources", {{"gpus", gpus}, {"cpus", cpus}, {"mem_mb", mem_mb}}},
               {"seed", seed}};
        if (!base_image.empty() || !packages.empty()) {
            json env = json::object();
            if (!base_image.empty()) {
                env["base_image"] = base_image;
            }
            json list = json::array();
            for (const auto& p : packages) {
                const auto at = p.find("==");
                if (at == std::string::npos || at == 0) {
                    throw UsageError("package must be name==version: " + p);
                }
                list.push_back({p.substr(0, at), p.substr(at + 2)});
            }
            env["packages"] = list;
            j["environment"] = env;
        }
        return j;
    }
};

// Commands. Each returns an exit code.

int cmd_run(Context& c, const RunOptions& o) {
    const auto body = c.post("/v1/sessions", o.body());
    if (!c.raw(body)) {
        c.out << json::parse(body).at("session_id").get<std::string>() << "\n";
    }
    return kExitOk;
}

struct SweepOptions {
    std::vector<std::string> grid;
    std::vector<std::string> random;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

int cmd_sweep(Context& c, const RunOptions& o, const SweepOptions& s) {
    auto body = o.body();
    if (!s.grid.empty()) {
        json grid = json::object();
        for (const auto& g : s.grid) {
            const auto eq = g.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw UsageError("grid axis must be key=v1,v2,...: " + g);
            }
            json values = json::array();
            for (const auto& v : split(g.substr(eq + 1), ',')) {
                const auto [_, parsed] = parse_hyperparam("x=" + v);
                std::visit([&](const auto& x) { values.push_back(x); }, parsed);
            }
            grid[g.substr(0, eq)] = values;
        }
        body["grid"] = grid;
    }
    if (!s.random.empty()) {
        json ranges = json::object();
        for (const auto& r : s.random) {
            const auto eq = r.find('=');
            const auto colon = r.find(':', eq == std::string::npos ? 0 : eq);
            std::optional<double> lo, hi;
            if (eq != std::string::npos && colon != std::string::npos) {
                lo = parse_real(r.substr(eq + 1, colon - eq - 1));
                hi = parse_real(r.substr(colon + 1));
            }
            if (!lo || !hi || eq == 0) {
                throw UsageError("random range must be key=low:high: " + r);
            }
            ranges[r.substr(0, eq)] = {*lo, *hi};
        }
        body["random"] = {{"ranges", ranges}, {"samples", s.samples}, {"seed", s.seed}};
    }
    const auto res = c.post("/v1/sweeps", body);
    if (!c.raw(res)) {
        const auto j = json::parse(res);
        c.out << j.at("sweep_id").get<std::string>() << "\n";
        for (const auto& session : j.at("sessions")) {
            c.out << session.at("session_id").get<std::string>() << "\n";
        }
    }
    return kExitOk;
}

struct PushOptions {
    std::string name;
    std::string dir;
    std::string metric;
    std::string direction = "maximize";
};

int cmd_dataset_push(Context& c, const PushOptions& o) {
    const auto files = collect_files(o.dir);
    if (files.empty()) {
        throw Error(Errc::empty_directory, "no files in " + o.dir);
    }
    json list = json::array();
    for (const auto& f : files) {
        list.push_back({{"path", f.path}, {"data", base64_encode(f.data)}});
    }
    json body{{"name", o.name}, {"files", list}};
    if (!o.metric.empty()) {
        body["board"] = {{"metric", o.metric}, {"direction", o.direction}};
    }
    const auto res = c.post("/v1/datasets", body);
    if (!c.raw(res)) {
        const auto j = json::parse(res);
        std::uint64_t bytes = 0;
        for (const auto& m : j.at("manifest")) {
            bytes += m.at("size").get<std::uint64_t>();
        }
        c.out << "pushed " << j.at("name").get<std::string>() << "@" << j.at("version").get<int>() << " ("
              << j.at("manifest").size() << " files, " << bytes << " bytes)\n";
    }
    return kExitOk;
}

int cmd_dataset_list(Context& c, const std::string& name) {
    Query q;
    if (!name.empty()) {
        q.emplace_back("name", name);
    }
    const auto res = c.get("/v1/datasets", q);
    if (c.raw(res)) {
        return kExitOk;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& d : json::parse(res)) {
        std::uint64_t bytes = 0;
        for (const auto& m : d.at("manifest")) {
            bytes += m.at("size").get<std::uint64_t>();
        }
        const auto& board = d.at("board");
        rows.push_back({d.at("name").get<std::string>() + "@" + std::to_string(d.at("version").get<int>()),
                        std::to_string(d.at("manifest").size()), std::to_string(bytes),
                        board.is_null() ? "-"
                                        : board.at("metric").get<std::string>() + "/" +
                                              board.at("direction").get<std::string>(),
                        d.at("created_at").get<std::string>()});
    }
    c.out << format_table({"DATASET", "FILES", "BYTES", "BOARD", "CREATED_AT"}, rows);
    return kExitOk;
}

struct BoardOptions {
    std::string dataset;
    std::size_t top = 0;
    bool best_per_user = false;
};

int cmd_dataset_board(Context& c, const BoardOptions& o) {
    const auto ref = store::DatasetRef::parse(o.dataset);
    Query q;
    if (o.top > 0) {
        q.emplace_back("top_k", std::to_string(o.top));
    }
    if (o.best_per_user) {
        q.emplace_back("best_per_user", "true");
    }
    const auto version = ref.version == 0 ? std::string("latest") : std::to_string(ref.version);
    const auto res = c.get("/v1/datasets/" + ref.name + "/" + version + "/board", q);
    if (c.raw(res)) {
        return kExitOk;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : json::parse(res)) {
        rows.push_back({std::to_string(e.at("rank").get<int>()), e.at("session_id").get<std::string>(),
                        e.at("user").get<std::string>(), real_text(e.at("best_value")),
                        e.at("achieved_at").get<std::string>()});
    }
    c.out << format_table({"RANK", "SESSION", "USER", "VALUE", "ACHIEVED_AT"}, rows);
    return kExitOk;
}

struct LogsOptions {
    std::string session;
    std::optional<std::size_t> tail;
    std::string name;
    bool follow = false;
};

/// Splits a server-sent-event byte stream into (event, data) frames.
class SseParser {
public:
    template <class F>
    bool feed(std::string_view chunk, F&& on_frame) {
        buffer_.append(chunk);
        std::size_t end;
        while ((end = buffer_.find("\n\n")) != std::string::npos) {
            std::string event, data;
            for (const auto& line : split(std::string_view(buffer_).substr(0, end), '\n')) {
                if (line.rfind("event: ", 0) == 0) {
                    event = line.substr(7);
                } else if (line.rfind("data: ", 0) == 0) {
                    data += line.substr(6);
                }
            }
            buffer_.erase(0, end + 2);
            if (!event.empty() && !on_frame(event, data)) {
                return false;
            }
        }
        return true;
    }

private:
    std::string buffer_;
};

int cmd_logs(Context& c, const LogsOptions& o) {
    Query q;
    if (!o.name.empty()) {
        q.emplace_back("name", o.name);
    }
    if (o.tail) {
        q.emplace_back("tail", std::to_string(*o.tail));
    }
    const auto snapshot = c.get(session_path(o.session, "logs"), q);
    const auto points = json::parse(snapshot);
    std::int64_t last_step = -1;
    for (const auto& p : points) {
        last_step = std::max(last_step, p.at("step").get<std::int64_t>());
    }
    if (!o.follow) {
        if (!c.raw(snapshot)) {
            for (const auto& p : points) {
                c.out << point_line(p);
            }
        }
        return kExitOk;
    }
    // Follow mode writes one point per line in both output modes.
    for (const auto& p : points) {
        c.out << (c.json_output() ? p.dump() + "\n" : point_line(p));
    }
    c.out.flush();
    SseParser parser;
    auto r = c.conn().stream(
        session_path(o.session, "events"), {{"replay", "1000000"}}, c.headers(), [&](std::string_view chunk) {
            return parser.feed(chunk, [&](const std::string& event, const std::string& data) {
                const auto j = json::parse(data);
                if (event == "metric") {
                    if (j.at("step").get<std::int64_t>() > last_step &&
                        (o.name.empty() || j.at("name").get<std::string>() == o.name)) {
                        c.out << (c.json_output() ? j.dump() + "\n" : point_line(j));
                        c.out.flush();
                    }
                    return true;
                }
                return !j.value("terminal", false);
            });
        });
    if (r.status >= 400) {
        raise_remote(r);
    }
    return kExitOk;
}

struct PlotOptions {
    std::vector<std::string> sessions;
    std::string metric = "loss";
    std::string out;
};

int cmd_plot(Context& c, const PlotOptions& o) {
    Query q{{"metric", o.metric}};
    std::string compare;
    for (std::size_t i = 1; i < o.sessions.size(); ++i) {
        check_session_id(o.sessions[i]);
        compare += (compare.empty() ? "" : ",") + o.sessions[i];
    }
    if (!compare.empty()) {
        q.emplace_back("compare", compare);
    }
    const auto csv = c.get(session_path(o.sessions.at(0), "plot.csv"), q);
    if (o.out.empty()) {
        c.out << csv;
        return kExitOk;
    }
    std::ofstream f(o.out, std::ios::binary);
    f << csv;
    if (!f) {
        throw Error(Errc::invalid_argument, "cannot write " + o.out);
    }
    c.out << "wrote " << o.out << "\n";
    return kExitOk;
}

struct ListOptions {
    std::string user;
    std::string dataset;
    std::string state;
};

int cmd_session_list(Context& c, const ListOptions& o) {
    Query q;
    if (!o.user.empty()) q.emplace_back("user", o.user);
    if (!o.dataset.empty()) q.emplace_back("dataset", o.dataset);
    if (!o.state.empty()) q.emplace_back("state", o.state);
    const auto res = c.get("/v1/sessions", q);
    if (c.raw(res)) {
        return kExitOk;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : json::parse(res)) {
        rows.push_back({s.at("session_id").get<std::string>(), s.at("state").get<std::string>(),
                        std::to_string(s.at("step").get<std::int64_t>()), real_text(s.at("best_value")),
                        s.at("node_id").is_null() ? "-" : s.at("node_id").get<std::string>(),
                        hyperparams_text(s.at("hyperparams"))});
    }
    c.out << format_table({"SESSION", "STATE", "STEP", "BEST", "NODE", "HYPERPARAMS"}, rows);
    return kExitOk;
}

int cmd_session_get(Context& c, const std::string& id) {
    const auto res = c.get(session_path(id));
    if (c.raw(res)) {
        return kExitOk;
    }
    const auto s = json::parse(res);
    const auto& parent = s.at("parent");
    c.out << key_values({
        {"session", s.at("session_id").get<std::string>()},
        {"state", s.at("state").get<std::string>()},
        {"dataset", s.at("dataset").get<std::string>()},
        {"entrypoint", s.at("entrypoint").get<std::string>()},
        {"code", s.at("code_digest").get<std::string>()},
        {"hyperparams", hyperparams_text(s.at("hyperparams"))},
        {"step", std::to_string(s.at("step").get<std::int64_t>()) + "/" +
                     std::to_string(s.at("max_steps").get<std::int64_t>())},
        {"best", real_text(s.at("best_value"))},
        {"node", s.at("node_id").is_null() ? "-" : s.at("node_id").get<std::string>()},
        {"parent", parent.is_null() ? "-"
                                    : parent.at("session_id").get<std::string>() + "@" +
                                          std::to_string(parent.at("step").get<std::int64_t>())},
    });
    std::vector<std::vector<std::string>> rows;
    for (const auto& h : s.at("history")) {
        rows.push_back({h.at("at").get<std::string>(), h.at("transition").get<std::string>(),
                        h.at("detail").get<std::string>()});
    }
    c.out << "\n" << format_table({"AT", "TRANSITION", "DETAIL"}, rows);
    return kExitOk;
}

int print_state(Context& c, const std::string& body) {
    if (!c.raw(body)) {
        const auto s = json::parse(body);
        c.out << s.at("session_id").get<std::string>() << "  " << s.at("state").get<std::string>() << "  "
              << hyperparams_text(s.at("hyperparams")) << "\n";
    }
    return kExitOk;
}

int print_new_session(Context& c, const std::string& body) {
    if (!c.raw(body)) {
        c.out << json::parse(body).at("session_id").get<std::string>() << "\n";
    }
    return kExitOk;
}

struct ForkOptions {
    std::string session;
    std::string checkpoint = "latest";
    std::vector<std::string> hp;
    std::optional<std::int64_t> max_steps;
};

int cmd_session_fork(Context& c, const ForkOptions& o) {
    json body{{"checkpoint", o.checkpoint}, {"hyperparams", hyperparams_json(o.hp)}};
    if (o.max_steps) {
        body["max_steps"] = *o.max_steps;
    }
    return print_new_session(c, c.post(session_path(o.session, "fork"), body));
}

struct InferOptions {
    std::string session;
    std::string checkpoint = "latest";
    std::string input;
};

int cmd_infer(Context& c, const InferOptions& o) {
    std::ifstream f(o.input, std::ios::binary);
    if (!f) {
        throw UsageError("cannot read input file " + o.input);
    }
    const Bytes data{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    const auto res = c.post(session_path(o.session, "infer"),
                            json{{"checkpoint", o.checkpoint}, {"input", base64_encode(data)}});
    if (!c.raw(res)) {
        const auto j = json::parse(res);
        c.out << key_values({{"label", std::to_string(j.at("label").get<int>())},
                             {"confidence", real_text(j.at("confidence"))},
                             {"checkpoint", std::to_string(j.at("checkpoint_step").get<std::int64_t>())}});
    }
    return kExitOk;
}

int cmd_cluster(Context& c) {
    const auto res = c.get("/v1/cluster");
    if (c.raw(res)) {
        return kExitOk;
    }
    const auto j = json::parse(res);
    c.out << "term " << j.at("term").get<std::uint64_t>() << "  leader " << j.at("leader").get<std::string>()
          << "  log seq " << j.at("event_log_seq").get<std::uint64_t>() << "\n\n";
    auto used = [](const json& n, const char* dim) {
        const auto total = n.at("total").at(dim).get<std::int64_t>();
        return std::to_string(total - n.at("free").at(dim).get<std::int64_t>()) + "/" + std::to_string(total);
    };
    std::vector<std::vector<std::string>> nodes;
    for (const auto& n : j.at("nodes")) {
        std::string jobs;
        for (const auto& job : n.at("jobs")) {
            jobs += (jobs.empty() ? "" : ",") + job.get<std::string>();
        }
        nodes.push_back({n.at("node_id").get<std::string>(), n.at("alive").get<bool>() ? "yes" : "no",
                         used(n, "gpus"), used(n, "cpus"), used(n, "mem_mb"), jobs.empty() ? "-" : jobs});
    }
    c.out << format_table({"NODE", "ALIVE", "GPUS", "CPUS", "MEM_MB", "JOBS"}, nodes);
    std::vector<std::vector<std::string>> queue;
    for (const auto& q : j.at("queue")) {
        queue.push_back({std::to_string(q.at("position").get<std::size_t>()), q.at("job_id").get<std::string>(),
                         std::to_string(q.at("priority").get<int>()),
                         std::to_string(q.at("request").at("gpus").get<std::int64_t>()),
                         q.at("requeued").get<bool>() ? "yes" : "no"});
    }
    c.out << "\n" << format_table({"POS", "JOB", "PRIORITY", "GPUS", "REQUEUED"}, queue);
    return kExitOk;
}

} // namespace

int dispatch(const std::vector<std::string>& args, const std::map<std::string, std::string>& env,
             std::ostream& out, std::ostream& err, const TransportFactory& transport) {
    Context ctx{kDefaultEndpoint, "user", "text", out, err, transport, nullptr};
    std::function<int()> action;

    CLI::App app{"mlforge: submit and steer training sessions", "mlforge"};
    app.require_subcommand(1);
    app.add_option("--endpoint", ctx.endpoint, "Gateway URL (MLFORGE_ENDPOINT wins)");
    app.add_option("--user", ctx.user, "User name (MLFORGE_USER wins)");
    app.add_option("-o,--output", ctx.output, "Output format")->check(CLI::IsMember({"text", "json"}));

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Package the directory and start a session");
    run.add_to(*run_cmd);
    run_cmd->callback([&] { action = [&] { return cmd_run(ctx, run); }; });

    RunOptions sweep_run;
    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Start one session per hyperparameter combination");
    sweep_run.add_to(*sweep_cmd);
    sweep_cmd->add_option("--grid", sweep.grid, "Grid axis key=v1,v2,... (repeatable)");
    sweep_cmd->add_option("--random", sweep.random, "Uniform range key=low:high (repeatable)");
    sweep_cmd->add_option("--samples", sweep.samples, "Random samples");
    sweep_cmd->add_option("--sweep-seed", sweep.seed, "Random sampling seed");
    sweep_cmd->callback([&] { action = [&] { return cmd_sweep(ctx, sweep_run, sweep); }; });

    auto* dataset = app.add_subcommand("dataset", "Manage datasets");
    dataset->require_subcommand(1);
    PushOptions push;
    auto* push_cmd = dataset->add_subcommand("push", "Upload a directory as a new dataset version");
    push_cmd->add_option("name", push.name, "Dataset name")->required();
    push_cmd->add_option("dir", push.dir, "Directory to upload")->required();
    push_cmd->add_option("--board-metric", push.metric, "Metric ranked on the leaderboard");
    push_cmd->add_option("--direction", push.direction, "maximize or minimize")
        ->check(CLI::IsMember({"maximize", "minimize", "max", "min"}));
    push_cmd->callback([&] { action = [&] { return cmd_dataset_push(ctx, push); }; });
    std::string list_name;
    auto* list_cmd = dataset->add_subcommand("list", "List dataset versions");
    list_cmd->add_option("name", list_name, "Only this dataset");
    list_cmd->callback([&] { action = [&] { return cmd_dataset_list(ctx, list_name); }; });
    BoardOptions board;
    auto* board_cmd = dataset->add_subcommand("board", "Show the leaderboard of a dataset");
    board_cmd->add_option("dataset", board.dataset, "name or name@version")->required();
    board_cmd->add_option("--top", board.top, "Show the first k entries");
    board_cmd->add_flag("--best-per-user", board.best_per_user, "Keep each user's best session only");
    board_cmd->callback([&] { action = [&] { return cmd_dataset_board(ctx, board); }; });

    LogsOptions logs;
    auto* logs_cmd = app.add_subcommand("logs", "Print metric points of a session");
    logs_cmd->add_option("session", logs.session, "Session id")->required();
    logs_cmd->add_option("--tail", logs.tail, "Last k points only");
    logs_cmd->add_option("--name", logs.name, "Only this metric");
    logs_cmd->add_flag("-f,--follow", logs.follow, "Keep printing until the session ends");
    logs_cmd->callback([&] { action = [&] { return cmd_logs(ctx, logs); }; });

    PlotOptions plot;
    auto* plot_cmd = app.add_subcommand("plot", "Export a metric of one or more sessions as CSV");
    plot_cmd->add_option("sessions", plot.sessions, "Session ids")->required();
    plot_cmd->add_option("--metric", plot.metric, "Metric name");
    plot_cmd->add_option("--out", plot.out, "Write to a file instead of stdout");
    plot_cmd->callback([&] { action = [&] { return cmd_plot(ctx, plot); }; });

    auto* session = app.add_subcommand("session", "Inspect and steer sessions");
    session->require_subcommand(1);
    ListOptions list;
    auto* slist = session->add_subcommand("list", "List sessions");
    slist->add_option("--user", list.user, "Only this user's sessions");
    slist->add_option("--dataset", list.dataset, "Only sessions on this dataset");
    slist->add_option("--state", list.state, "Only sessions in this state");
    slist->callback([&] { action = [&] { return cmd_session_list(ctx, list); }; });
    std::string get_id;
    auto* sget = session->add_subcommand("get", "Show one session");
    sget->add_option("session", get_id, "Session id")->required();
    sget->callback([&] { action = [&] { return cmd_session_get(ctx, get_id); }; });
    std::string stop_id;
    auto* sstop = session->add_subcommand("stop", "Stop a session");
    sstop->add_option("session", stop_id, "Session id")->required();
    sstop->callback([&] { action = [&] { return print_state(ctx, ctx.post(session_path(stop_id, "stop"), json::object())); }; });
    ForkOptions fork;
    auto* sfork = session->add_subcommand("fork", "Start a new session from a checkpoint");
    sfork->add_option("session", fork.session, "Parent session id")->required();
    sfork->add_option("--checkpoint", fork.checkpoint, "latest, best or a step");
    sfork->add_option("--hp", fork.hp, "Hyperparameter override key=value (repeatable)");
    sfork->add_option("--max-steps", fork.max_steps, "Total steps for the fork");
    sfork->callback([&] { action = [&] { return cmd_session_fork(ctx, fork); }; });
    std::string tune_id;
    std::vector<std::string> tune_hp;
    auto* stune = session->add_subcommand("tune", "Pause, change hyperparameters and resume");
    stune->add_option("session", tune_id, "Session id")->required();
    stune->add_option("--hp", tune_hp, "Hyperparameter key=value (repeatable)")->required();
    stune->callback([&] {
        action = [&] {
            return print_state(ctx, ctx.post(session_path(tune_id, "tune"), {{"hyperparams", hyperparams_json(tune_hp)}}));
        };
    });
    std::string repro_id;
    auto* srepro = session->add_subcommand("reproduce", "Rerun a session with its original settings");
    srepro->add_option("session", repro_id, "Session id")->required();
    srepro->callback([&] {
        action = [&] { return print_new_session(ctx, ctx.post(session_path(repro_id, "reproduce"), json::object())); };
    });

    InferOptions infer;
    auto* infer_cmd = app.add_subcommand("infer", "Classify an input file with a checkpoint");
    infer_cmd->add_option("session", infer.session, "Session id")->required();
    infer_cmd->add_option("--checkpoint", infer.checkpoint, "latest, best or a step");
    infer_cmd->add_option("--input", infer.input, "Input file")->required();
    infer_cmd->callback([&] { action = [&] { return cmd_infer(ctx, infer); }; });

    auto* cluster = app.add_subcommand("cluster", "Show nodes and the job queue");
    cluster->callback([&] { action = [&] { return cmd_cluster(ctx); }; });

    std::vector<const char*> argv{"mlforge"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (auto it = env.find("MLFORGE_ENDPOINT"); it != env.end() && !it->second.empty()) {
        ctx.endpoint = it->second;
    }
    if (auto it = env.find("MLFORGE_USER"); it != env.end() && !it->second.empty()) {
        ctx.user = it->second;
    }
    try {
        return action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const RemoteError& e) {
        err << "error: " << e.code << ": " << e.what() << "\n";
        return kExitRemote;
    } catch (const ConnectionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConnectivity;
    } catch (const Error& e) {
        err << "error: " << e.code_name() << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        err << "error: unexpected response: " << e.what() << "\n";
        return kExitRemote;
    }
}

} // namespace mlforge::cli
