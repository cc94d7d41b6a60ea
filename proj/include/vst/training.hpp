#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vst/metrics.hpp"
#include "vst/mlp.hpp"
#include "vst/ode.hpp"
#include "vst/scaler.hpp"

namespace vst {

struct ShootingConfig {
    int segment_len = 80;           // data points per shooting segment
    double continuity_weight = 1.0; // junction penalty weight

    void validate() const
    {
        if (segment_len < 2)
            throw ConfigError("ShootingConfig: segment_len must be >= 2");
        if (!(continuity_weight >= 0.0))
            throw ConfigError("ShootingConfig: continuity_weight must be "
                              ">= 0");
    }
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    ModelKind model_kind = ModelKind::ude;
    int hidden_size = 10;
    double learning_rate = 0.025;
    int iterations = 2000; // ADAM iterations per data sample
    std::uint64_t seed = 1;
    AdamConfig adam;
    ShootingConfig shooting;
    int substeps = 10;

    void validate() const;
};

// One generated experiment data set: the 9-state reference trajectory plus
// its noisy 7-state projection sharing the same grid.
struct DataSample {
    int sample_id = 0;
    Trajectory clean;
    Trajectory noisy;
    double split_time = 70.0;
    double noise_sigma = 0.025;
    std::uint64_t rng_seed = 0;

    // first validation sample; the training window is [0, split_index)
    std::size_t split_index() const;
    void validate() const;
};

// Per-channel mean/std (population) over the 7 states + 2 inputs of a
// trajectory; throws on zero-variance channels.
ZScoreScaler fit_scaler(const Trajectory& traj);

// Seeded white Gaussian noise with deviation sigma added per state channel
// in z-space, transformed back to original space; inputs stay clean.
Trajectory add_noise(const Trajectory& traj, const ZScoreScaler& scaler,
                     double sigma, std::uint64_t rng_seed);

struct AdamState {
    std::vector<double> m, v;
    long step = 0;

    void reset(std::size_t n)
    {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        step = 0;
    }
};

// One bias-corrected ADAM update of params in place.
void adam_step(std::vector<double>& params, AdamState& state,
               std::span<const double> grad, double lr,
               const AdamConfig& cfg);

// Multiple-shooting objective over one sample's training window: the window
// is partitioned into segments of segment_len points (last one shorter);
// each segment is rolled out from its own trainable shooting state, scored
// against the noisy data in z-space, and tied to the next segment's shooting
// state by a continuity penalty on the one-step-extended rollout end.
class ShootingLoss {
public:
    ShootingLoss(ModelKind kind, MlpDims dims, const ZScoreScaler* scaler,
                 const DataSample* sample, ShootingConfig cfg, int substeps);

    std::size_t n_segments() const { return segments_.size(); }
    std::size_t n_shooting_vars() const { return n_segments() * kNumStates; }

    // shooting states initialized from the noisy measurements
    std::vector<double> initial_shooting_states() const;

    // Returns the loss; overwrites d_theta (size param_count) and
    // d_shooting (size n_shooting_vars).
    double evaluate(const MlpParams& net, std::span<const double> shooting,
                    std::span<double> d_theta, std::span<double> d_shooting);

private:
    struct Segment {
        std::size_t start = 0; // first data index
        int n_data = 0;        // scored data points
        bool has_continuity = false;
    };

    ModelKind kind_;
    const ZScoreScaler* scaler_;
    const DataSample* sample_;
    ShootingConfig cfg_;
    std::vector<Segment> segments_;
    RolloutEngine engine_;
    Matrix cotangents_;
};

struct LossRecord {
    int sample_id = 0;
    int iteration = 0;
    double loss = 0.0;
};

struct TrainResult {
    MlpParams net;
    std::vector<LossRecord> history;
};

using ProgressFn = std::function<void(int sample_id, int iteration,
                                      double loss)>;

// Sequential training: theta initialized from cfg.seed, then for each data
// sample in order cfg.iterations ADAM steps of the multiple-shooting loss,
// carrying theta over and re-initializing shooting states (and optimizer
// moments) per sample.
TrainResult train(const TrainConfig& cfg,
                  const std::array<DataSample, 3>& samples,
                  const ZScoreScaler& scaler,
                  const ProgressFn& progress = nullptr);

// Full-window evaluation of a trained model on one sample: training SSE from
// a single rollout over [0, split) against the noisy data, validation SSE
// from a re-simulation started at the clean split state over [split, end)
// against the clean data.
struct ModelEval {
    double train_sse = 0.0;
    double val_sse = 0.0;
    std::array<double, kNumStates> per_state_train{};
    std::array<double, kNumStates> per_state_val{};
    Trajectory train_rollout;
    Trajectory val_rollout;
};

ModelEval evaluate_model(ModelKind kind, const MlpParams& net,
                         const ZScoreScaler& scaler, const DataSample& sample,
                         int substeps);

struct SweepCell {
    ModelKind model = ModelKind::ude;
    int hidden = 0;
    std::uint64_t seed = 0;
    double lr = 0.0;
    std::size_t weights = 0;
    double train_sse = 0.0;
    double val_sse = 0.0;
    std::string status; // "ok" or "failed: <reason>"
};

struct SweepRequest {
    ModelKind model = ModelKind::ude;
    std::vector<int> hidden_sizes{5, 8, 10, 12};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double lr = 0.025;
    int iterations = 2000;
    int jobs = 1;
};

using CellDoneFn = std::function<void(const SweepCell&)>;

// Trains every (hidden, seed) cell, evaluates on sample three, and records
// per-cell failures without aborting the sweep. Cells are independent and
// may run on a worker pool; results are deterministic and ordered.
std::vector<SweepCell> sweep(const SweepRequest& req, const TrainConfig& base,
                             const std::array<DataSample, 3>& samples,
                             const ZScoreScaler& scaler,
                             const CellDoneFn& on_done = nullptr);

} // namespace vst
