#include "vst/training.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <random>
#include <thread>

#include "vst/kernels.hpp"

namespace vst {

void TrainConfig::validate() const
{
    if (hidden_size < 1 || hidden_size > kMaxHidden)
        throw ConfigError("TrainConfig: hidden_size out of range");
    if (!std::isfinite(learning_rate) || learning_rate < 0.0)
        throw ConfigError("TrainConfig: learning_rate must be >= 0");
    if (iterations < 0)
        throw ConfigError("TrainConfig: iterations must be >= 0");
    if (substeps < 1)
        throw ConfigError("TrainConfig: substeps must be >= 1");
    shooting.validate();
}

std::size_t DataSample::split_index() const
{
    const double dt = clean.times[1] - clean.times[0];
    return static_cast<std::size_t>(
        std::llround((split_time - clean.times.front()) / dt));
}

void DataSample::validate() const
{
    clean.validate();
    noisy.validate();
    if (noisy.size() != clean.size() ||
        std::abs(noisy.times.front() - clean.times.front()) > 1e-12)
        throw ConfigError("DataSample: noisy copy must share the clean grid");
    if (noisy.states.cols != kNumStates)
        throw ConfigError("DataSample: noisy trajectory must be 7-state");
    const std::size_t split = split_index();
    if (split < 2 || split >= clean.size())
        throw ConfigError("DataSample: split_time outside the grid");
}

ZScoreScaler fit_scaler(const Trajectory& traj)
{
    traj.validate();
    if (traj.states.cols != kNumStates || traj.inputs.cols != kNumInputs)
        throw ConfigError("fit_scaler: expected 7 states and 2 inputs");

    const std::size_t n = traj.size();
    std::array<double, kNumChannels> mean{}, sd{};
    auto channel = [&](std::size_t i, int c) {
        return c < kNumStates ? traj.states.at(i, c)
                              : traj.inputs.at(i, c - kNumStates);
    };
    for (int c = 0; c < kNumChannels; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sum += channel(i, c);
        mean[c] = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = channel(i, c) - mean[c];
            sq += d * d;
        }
        sd[c] = std::sqrt(sq / static_cast<double>(n)); // population std
        if (!(sd[c] > 1e-12 * std::max(1.0, std::abs(mean[c]))))
            throw ConfigError("fit_scaler: channel " + std::to_string(c) +
                              " has zero variance");
    }
    ZScoreScaler scaler;
    scaler.set(mean, sd);
    return scaler;
}

namespace {

// Deterministic standard normals: Box-Muller over mt19937_64 bits (the
// std distributions are implementation-defined).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 =
            (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace

Trajectory add_noise(const Trajectory& traj, const ZScoreScaler& scaler,
                     double sigma, std::uint64_t rng_seed)
{
    scaler.require_fitted();
    if (traj.states.cols != kNumStates)
        throw ConfigError("add_noise: expected a 7-state trajectory");
    if (!(sigma >= 0.0))
        throw ConfigError("add_noise: sigma must be >= 0");

    Trajectory out = traj;
    GaussianStream noise(rng_seed);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double* row = out.states.row(i);
        for (int c = 0; c < kNumStates; ++c)
            // z' = z + sigma n  <=>  x' = x + sigma n std_c
            row[c] += sigma * noise.next() * scaler.stds[c];
    }
    return out;
}

void adam_step(std::vector<double>& params, AdamState& state,
               std::span<const double> grad, double lr, const AdamConfig& cfg)
{
    if (state.m.empty())
        state.reset(params.size());
    if (grad.size() != params.size() || state.m.size() != params.size())
        throw ConfigError("adam_step: size mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
    kernels::active().adam_update(params.data(), state.m.data(),
                                  state.v.data(), grad.data(), params.size(),
                                  lr, cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2);
}

ShootingLoss::ShootingLoss(ModelKind kind, MlpDims dims,
                           const ZScoreScaler* scaler,
                           const DataSample* sample, ShootingConfig cfg,
                           int substeps)
    : kind_(kind), scaler_(scaler), sample_(sample), cfg_(cfg),
      engine_(kind, dims, scaler, sample->sample_id,
              sample->clean.times[1] - sample->clean.times[0], substeps)
{
    cfg_.validate();
    sample_->validate();
    const std::size_t split = sample_->split_index();
    for (std::size_t start = 0; start < split;
         start += static_cast<std::size_t>(cfg_.segment_len)) {
        Segment seg;
        seg.start = start;
        seg.n_data = static_cast<int>(
            std::min<std::size_t>(cfg_.segment_len, split - start));
        seg.has_continuity = start + seg.n_data < split;
        segments_.push_back(seg);
    }
}

std::vector<double> ShootingLoss::initial_shooting_states() const
{
    std::vector<double> s(n_shooting_vars());
    for (std::size_t i = 0; i < segments_.size(); ++i)
        std::memcpy(s.data() + i * kNumStates,
                    sample_->noisy.states.row(segments_[i].start),
                    kNumStates * sizeof(double));
    return s;
}

double ShootingLoss::evaluate(const MlpParams& net,
                              std::span<const double> shooting,
                              std::span<double> d_theta,
                              std::span<double> d_shooting)
{
    if (shooting.size() != n_shooting_vars() ||
        d_shooting.size() != n_shooting_vars())
        throw ConfigError("ShootingLoss: shooting-state size mismatch");
    if (d_theta.size() != net.theta.size())
        throw ConfigError("ShootingLoss: d_theta size mismatch");

    std::fill(d_theta.begin(), d_theta.end(), 0.0);
    std::fill(d_shooting.begin(), d_shooting.end(), 0.0);

    const auto& k = kernels::active();
    const double* inv = scaler_->inv_stds.data();
    const double w = cfg_.continuity_weight;
    double loss = 0.0;

    for (std::size_t si = 0; si < segments_.size(); ++si) {
        const Segment& seg = segments_[si];
        const int n_intervals = seg.n_data - 1 + (seg.has_continuity ? 1 : 0);
        const double t_start = sample_->noisy.times[seg.start];

        try {
            engine_.forward_pass(net, shooting.data() + si * kNumStates,
                                 t_start, n_intervals);
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (segment " +
                               std::to_string(si) + " starting at data index " +
                               std::to_string(seg.start) + ")");
        }
        const Matrix& xs = engine_.states();

        cotangents_.rows = static_cast<std::size_t>(n_intervals) + 1;
        cotangents_.cols = kNumStates;
        cotangents_.data.assign(cotangents_.rows * kNumStates, 0.0);

        for (int j = 0; j < seg.n_data; ++j) {
            const double* est = xs.row(j);
            const double* dat = sample_->noisy.states.row(seg.start + j);
            loss += k.sse_scaled(dat, est, inv, kNumStates);
            double* c = cotangents_.row(j);
            for (int ch = 0; ch < kNumStates; ++ch)
                c[ch] = 2.0 * (est[ch] - dat[ch]) * inv[ch] * inv[ch];
        }

        if (seg.has_continuity) {
            const double* rollout_end = xs.row(n_intervals);
            const double* s_next = shooting.data() + (si + 1) * kNumStates;
            loss += w * k.sse_scaled(rollout_end, s_next, inv, kNumStates);
            double* c = cotangents_.row(n_intervals);
            double* ds_next = d_shooting.data() + (si + 1) * kNumStates;
            for (int ch = 0; ch < kNumStates; ++ch) {
                const double diff =
                    (rollout_end[ch] - s_next[ch]) * inv[ch] * inv[ch];
                c[ch] += 2.0 * w * diff;
                ds_next[ch] -= 2.0 * w * diff;
            }
        }

        double d_x0[kNumStates];
        engine_.backward_pass(net, cotangents_, d_theta.data(), d_x0);
        k.axpy(1.0, d_x0, d_shooting.data() + si * kNumStates, kNumStates);
    }
    return loss;
}

TrainResult train(const TrainConfig& cfg,
                  const std::array<DataSample, 3>& samples,
                  const ZScoreScaler& scaler, const ProgressFn& progress)
{
    cfg.validate();
    scaler.require_fitted();

    const MlpDims dims = model_dims(cfg.model_kind, cfg.hidden_size);
    MlpParams net = init_mlp(dims, cfg.seed);
    const std::size_t n_theta = net.theta.size();

    TrainResult result;
    result.history.reserve(static_cast<std::size_t>(cfg.iterations) * 3);

    for (const DataSample& sample : samples) {
        ShootingLoss loss(cfg.model_kind, dims, &scaler, &sample,
                          cfg.shooting, cfg.substeps);

        std::vector<double> params(n_theta + loss.n_shooting_vars());
        std::memcpy(params.data(), net.theta.data(),
                    n_theta * sizeof(double));
        const std::vector<double> s0 = loss.initial_shooting_states();
        std::memcpy(params.data() + n_theta, s0.data(),
                    s0.size() * sizeof(double));

        std::vector<double> grad(params.size());
        AdamState adam;
        adam.reset(params.size());

        for (int it = 1; it <= cfg.iterations; ++it) {
            std::memcpy(net.theta.data(), params.data(),
                        n_theta * sizeof(double));
            double value;
            try {
                value = loss.evaluate(
                    net, std::span<const double>(params).subspan(n_theta),
                    std::span<double>(grad).first(n_theta),
                    std::span<double>(grad).subspan(n_theta));
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " [sample " +
                                   std::to_string(sample.sample_id) +
                                   ", iteration " + std::to_string(it) + "]");
            }
            if (!std::isfinite(value))
                throw NumericError(
                    "train: non-finite loss [sample " +
                    std::to_string(sample.sample_id) + ", iteration " +
                    std::to_string(it) + "]");
            result.history.push_back({sample.sample_id, it, value});
            if (progress)
                progress(sample.sample_id, it, value);
            adam_step(params, adam, grad, cfg.learning_rate, cfg.adam);
        }
        std::memcpy(net.theta.data(), params.data(), n_theta * sizeof(double));
    }

    result.net = std::move(net);
    return result;
}

ModelEval evaluate_model(ModelKind kind, const MlpParams& net,
                         const ZScoreScaler& scaler, const DataSample& sample,
                         int substeps)
{
    net.validate();
    scaler.require_fitted();
    sample.validate();

    const std::size_t split = sample.split_index();
    const std::size_t n = sample.clean.size();
    const double dt = sample.clean.times[1] - sample.clean.times[0];
    const int sid = sample.sample_id;

    auto rhs = [&](double t, const double* x, double* dx) {
        const ExogenousInput u = input_signal(t, sid);
        if (kind == ModelKind::node)
            node_rhs(x, u, net, scaler, dx);
        else
            ude_rhs(x, u, net, scaler, dx);
    };

    ModelEval ev;

    // training window: single rollout from the clean initial state, scored
    // against the noisy data
    TimeGrid train_grid{sample.clean.times.front(),
                        sample.clean.times[split - 1], dt, substeps};
    ev.train_rollout = simulate(
        rhs, std::span<const double>(sample.clean.states.row(0), kNumStates),
        train_grid, sid);
    const Trajectory noisy_train = slice_trajectory(sample.noisy, 0, split);
    ev.train_sse = sse_z(noisy_train, ev.train_rollout, scaler);
    ev.per_state_train = per_state_sse_z(noisy_train, ev.train_rollout,
                                         scaler);

    // validation window 70 <= t < 100: re-simulation from the clean split
    // state, scored against the clean reference
    TimeGrid val_grid{sample.clean.times[split], sample.clean.times[n - 2],
                      dt, substeps};
    ev.val_rollout = simulate(
        rhs,
        std::span<const double>(sample.clean.states.row(split), kNumStates),
        val_grid, sid);
    const Trajectory clean_val =
        slice_trajectory(project_to_states(sample.clean), split, n - 1);
    ev.val_sse = sse_z(clean_val, ev.val_rollout, scaler);
    ev.per_state_val = per_state_sse_z(clean_val, ev.val_rollout, scaler);
    return ev;
}

std::vector<SweepCell> sweep(const SweepRequest& req, const TrainConfig& base,
                             const std::array<DataSample, 3>& samples,
                             const ZScoreScaler& scaler,
                             const CellDoneFn& on_done)
{
    std::vector<SweepCell> cells;
    for (int hidden : req.hidden_sizes)
        for (std::uint64_t seed : req.seeds) {
            SweepCell c;
            c.model = req.model;
            c.hidden = hidden;
            c.seed = seed;
            c.lr = req.lr;
            c.weights = param_count(model_dims(req.model, hidden));
            c.status = "pending";
            cells.push_back(c);
        }

    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size())
                return;
            SweepCell& cell = cells[i];
            TrainConfig cfg = base;
            cfg.model_kind = req.model;
            cfg.hidden_size = cell.hidden;
            cfg.seed = cell.seed;
            cfg.learning_rate = req.lr;
            cfg.iterations = req.iterations;
            try {
                const TrainResult r = train(cfg, samples, scaler);
                const ModelEval ev = evaluate_model(req.model, r.net, scaler,
                                                    samples[2], cfg.substeps);
                cell.train_sse = ev.train_sse;
                cell.val_sse = ev.val_sse;
                cell.status = "ok";
            } catch (const std::exception& e) {
                cell.train_sse = std::nan("");
                cell.val_sse = std::nan("");
                cell.status = std::string("failed: ") + e.what();
            }
            if (on_done) {
                std::lock_guard<std::mutex> lock(done_mutex);
                on_done(cell);
            }
        }
    };

    const int jobs = std::max(1, std::min<int>(req.jobs,
                                               static_cast<int>(cells.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    return cells;
}

} // namespace vst
