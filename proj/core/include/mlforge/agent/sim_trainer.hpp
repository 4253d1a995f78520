#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <mlforge/common/text.hpp>

namespace mlforge::agent {

/// State of the deterministic stand-in workload.
///
/// Learning progress `s` accumulates as lr x steps within each segment of
/// constant learning rate, and loss = l0 / (1 + s). Progress is recomputed
/// from the segment start on every step rather than summed incrementally, so
/// an interrupted and resumed run reproduces the uninterrupted one bit for bit.
struct SimTrainerState {
    std::int64_t step = 0;
    double progress = 0.0;
    std::int64_t segment_start_step = 0;
    double segment_start_progress = 0.0;
    std::map<std::string, double> hyperparams;  // must hold "lr" and "l0"
    std::uint64_t seed = 0;

    double lr() const;
    double l0() const;
    double loss() const { return l0() / (1.0 + progress); }

    /// Throws Error(invalid_argument) unless lr >= 0 and l0 > 0 are present.
    void validate() const;

    bool operator==(const SimTrainerState&) const = default;
};

SimTrainerState initial_state(std::map<std::string, double> hyperparams, std::uint64_t seed = 0);

/// Checkpoint blob: format byte 0x01, then key-sorted JSON of the state.
Bytes encode_checkpoint(const SimTrainerState& state);
/// Throws Error(invalid_argument) on an unknown format byte or bad body.
SimTrainerState decode_checkpoint(std::span<const std::uint8_t> bytes);

using StepMetrics = std::vector<std::pair<std::string, double>>;

/// Something an executor runs. One call to `step` advances one training step.
class Workload {
public:
    virtual ~Workload() = default;

    virtual std::int64_t current_step() const = 0;
    /// Advances one step; returns the metrics observed at the new step.
    virtual StepMetrics step() = 0;
    virtual Bytes checkpoint() const = 0;
    virtual void restore(std::span<const std::uint8_t> checkpoint) = 0;
    /// Merges new hyperparameter values into the running workload.
    virtual void retune(const std::map<std::string, double>& overrides) = 0;
};

/// Starts workloads. The simulated executor is the only backend shipped.
class Executor {
public:
    virtual ~Executor() = default;
    virtual std::unique_ptr<Workload> start(const std::map<std::string, double>& hyperparams,
                                            std::uint64_t seed,
                                            const std::optional<Bytes>& checkpoint) = 0;
};

class SimTrainer final : public Workload {
public:
    explicit SimTrainer(SimTrainerState state);

    std::int64_t current_step() const override { return state_.step; }
    StepMetrics step() override;
    Bytes checkpoint() const override { return encode_checkpoint(state_); }
    void restore(std::span<const std::uint8_t> checkpoint) override;
    void retune(const std::map<std::string, double>& overrides) override;

    const SimTrainerState& state() const noexcept { return state_; }

private:
    SimTrainerState state_;
};

class SimulatedExecutor final : public Executor {
public:
    /// Starts from the checkpoint if given; else from step 0 with the given
    /// hyperparameters. Hyperparameters passed alongside a checkpoint are
    /// applied on top of it as a retune.
    std::unique_ptr<Workload> start(const std::map<std::string, double>& hyperparams, std::uint64_t seed,
                                    const std::optional<Bytes>& checkpoint) override;
};

struct Prediction {
    int label = 0;
    double confidence = 0.0;
};

/// The demo model. Pure: label = (digest64(input) + floor(100 (1 - loss))) mod 10,
/// confidence = 1 - loss clamped to [0.01, 1].
Prediction infer(const SimTrainerState& checkpoint, std::span<const std::uint8_t> input);

} // namespace mlforge::agent
