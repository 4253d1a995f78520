#include <mlforge/agent/sim_trainer.hpp>

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include <mlforge/blobstore/digest.hpp>
#include <mlforge/common/error.hpp>

namespace mlforge::agent {

namespace {

constexpr std::uint8_t kCheckpointFormat = 0x01;

double required(const std::map<std::string, double>& hp, const char* key) {
    auto it = hp.find(key);
    if (it == hp.end()) {
        throw Error(Errc::invalid_argument, std::string("simulated trainer needs hyperparameter '") + key + "'");
    }
    return it->second;
}

} // namespace

double SimTrainerState::lr() const { return required(hyperparams, "lr"); }
double SimTrainerState::l0() const { return required(hyperparams, "l0"); }

void SimTrainerState::validate() const {
    if (!(lr() >= 0.0) || !std::isfinite(lr())) {
        throw Error(Errc::invalid_argument, "lr must be a finite value >= 0");
    }
    if (!(l0() > 0.0) || !std::isfinite(l0())) {
        throw Error(Errc::invalid_argument, "l0 must be a finite value > 0");
    }
    if (step < 0 || segment_start_step < 0 || segment_start_step > step) {
        throw Error(Errc::invalid_argument, "inconsistent trainer step counters");
    }
}

SimTrainerState initial_state(std::map<std::string, double> hyperparams, std::uint64_t seed) {
    SimTrainerState s;
    s.hyperparams = std::move(hyperparams);
    s.seed = seed;
    s.validate();
    return s;
}

Bytes encode_checkpoint(const SimTrainerState& state) {
    const nlohmann::json j{{"step", state.step},
                           {"progress", state.progress},
                           {"segment_start_step", state.segment_start_step},
                           {"segment_start_progress", state.segment_start_progress},
                           {"hyperparams", state.hyperparams},
                           {"seed", state.seed}};
    const std::string body = j.dump();
    Bytes out;
    out.reserve(body.size() + 1);
    out.push_back(kCheckpointFormat);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

SimTrainerState decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.empty() || bytes.front() != kCheckpointFormat) {
        throw Error(Errc::invalid_argument, "unsupported checkpoint format");
    }
    try {
        const auto j = nlohmann::json::parse(bytes.begin() + 1, bytes.end());
        SimTrainerState s;
        s.step = j.at("step").get<std::int64_t>();
        s.progress = j.at("progress").get<double>();
        s.segment_start_step = j.at("segment_start_step").get<std::int64_t>();
        s.segment_start_progress = j.at("segment_start_progress").get<double>();
        s.hyperparams = j.at("hyperparams").get<std::map<std::string, double>>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("malformed checkpoint: ") + e.what());
    }
}

SimTrainer::SimTrainer(SimTrainerState state) : state_(std::move(state)) { state_.validate(); }

StepMetrics SimTrainer::step() {
    ++state_.step;
    state_.progress =
        state_.segment_start_progress + state_.lr() * static_cast<double>(state_.step - state_.segment_start_step);
    const double loss = state_.loss();
    return {{"acc", 1.0 - loss}, {"loss", loss}};
}

void SimTrainer::restore(std::span<const std::uint8_t> checkpoint) { state_ = decode_checkpoint(checkpoint); }

void SimTrainer::retune(const std::map<std::string, double>& overrides) {
    SimTrainerState next = state_;
    for (const auto& [k, v] : overrides) {
        next.hyperparams[k] = v;
    }
    // Only a learning-rate change opens a new segment; anything else keeps
    // the closed form identical to an uninterrupted run.
    if (next.lr() != state_.lr()) {
        next.segment_start_step = next.step;
        next.segment_start_progress = next.progress;
    }
    next.validate();
    state_ = std::move(next);
}

std::unique_ptr<Workload> SimulatedExecutor::start(const std::map<std::string, double>& hyperparams,
                                                   std::uint64_t seed, const std::optional<Bytes>& checkpoint) {
    if (!checkpoint) {
        return std::make_unique<SimTrainer>(initial_state(hyperparams, seed));
    }
    auto trainer = std::make_unique<SimTrainer>(decode_checkpoint(*checkpoint));
    trainer->retune(hyperparams);
    return trainer;
}

Prediction infer(const SimTrainerState& checkpoint, std::span<const std::uint8_t> input) {
    const double loss = checkpoint.loss();
    const double quality = 1.0 - loss;
    const std::uint64_t digest64 = store::sha256(input).prefix64();
    // Reduce both terms mod 10 first; the sum of the raw values can overflow.
    const auto bonus = static_cast<std::int64_t>(std::floor(100.0 * quality));
    const std::int64_t label = (static_cast<std::int64_t>(digest64 % 10) + (bonus % 10 + 10) % 10) % 10;
    return Prediction{static_cast<int>(label), std::clamp(quality, 0.01, 1.0)};
}

} // namespace mlforge::agent
