#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vst/dynamics.hpp"
#include "vst/errors.hpp"
#include "vst/kernels.hpp"

namespace vst {

enum class ModelKind { node, ude };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
MlpDims model_dims(ModelKind kind, int hidden); // (9,h,7) or (6,h,3)

struct TimeGrid {
    double t0 = 0.0;
    double t1 = 100.0;
    double dt_out = 0.1; // output sample interval [s]
    int substeps = 10;   // internal RK4 steps per output interval

    void validate() const
    {
        if (!(t1 > t0) || !(dt_out > 0.0) || substeps < 1)
            throw ConfigError("TimeGrid: need t1 > t0, dt_out > 0, "
                              "substeps >= 1");
    }
    std::size_t n_samples() const
    {
        return static_cast<std::size_t>(std::llround((t1 - t0) / dt_out)) + 1;
    }
};

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0)
    {
    }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Universal exchange format: uniform time grid, one state row and one
// exogenous-input row per sample.
struct Trajectory {
    std::vector<double> times;
    Matrix states; // n_samples x n_states (7 or 9)
    Matrix inputs; // n_samples x 2

    std::size_t size() const { return times.size(); }
    void validate() const;
};

// Analytic exogenous inputs of the three data samples. Sample three is the
// published signal pair; one and two are gentler variants that enrich
// state-space coverage.
ExogenousInput input_signal(double t, int sample_id);
double sample_initial_velocity(int sample_id); // 20, 28, 25 m/s

struct Rk4Scratch {
    std::vector<double> k1, k2, k3, k4, xs;
    void resize(std::size_t n)
    {
        k1.resize(n);
        k2.resize(n);
        k3.resize(n);
        k4.resize(n);
        xs.resize(n);
    }
};

// One classical RK4 update; the rhs is evaluated at t, t+h/2, and t+h.
// rhs signature: void(double t, const double* x, double* dxdt).
template <class Rhs>
void rk4_step(Rhs&& rhs, double t, double h, const double* x, double* x_next,
              std::size_t n, Rk4Scratch& ws)
{
    const auto& k = kernels::active();
    ws.resize(n);
    rhs(t, x, ws.k1.data());
    std::memcpy(ws.xs.data(), x, n * sizeof(double));
    k.axpy(0.5 * h, ws.k1.data(), ws.xs.data(), n);
    rhs(t + 0.5 * h, ws.xs.data(), ws.k2.data());
    std::memcpy(ws.xs.data(), x, n * sizeof(double));
    k.axpy(0.5 * h, ws.k2.data(), ws.xs.data(), n);
    rhs(t + 0.5 * h, ws.xs.data(), ws.k3.data());
    std::memcpy(ws.xs.data(), x, n * sizeof(double));
    k.axpy(h, ws.k3.data(), ws.xs.data(), n);
    rhs(t + h, ws.xs.data(), ws.k4.data());
    k.rk4_combine(x, ws.k1.data(), ws.k2.data(), ws.k3.data(), ws.k4.data(),
                  h, x_next, n);
}

// Fixed-step integration over the output grid; deterministic. The inputs
// column records input_signal at the output times.
template <class Rhs>
Trajectory simulate(Rhs&& rhs, std::span<const double> x0,
                    const TimeGrid& grid, int sample_id)
{
    grid.validate();
    const std::size_t n = grid.n_samples();
    const std::size_t dim = x0.size();

    Trajectory traj;
    traj.times.resize(n);
    traj.states = Matrix(n, dim);
    traj.inputs = Matrix(n, 2);

    std::vector<double> x(x0.begin(), x0.end());
    Rk4Scratch ws;
    const double h = grid.dt_out / grid.substeps;

    for (std::size_t i = 0; i < n; ++i) {
        const double t_i = grid.t0 + static_cast<double>(i) * grid.dt_out;
        traj.times[i] = t_i;
        const ExogenousInput u = input_signal(t_i, sample_id);
        traj.inputs.at(i, 0) = u.a_x;
        traj.inputs.at(i, 1) = u.v_delta;
        std::memcpy(traj.states.row(i), x.data(), dim * sizeof(double));
        if (i + 1 == n)
            break;
        for (int s = 0; s < grid.substeps; ++s) {
            const double t_s = t_i + s * h;
            try {
                rk4_step(rhs, t_s, h, x.data(), x.data(), dim, ws);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " (while stepping "
                                   "from t=" + std::to_string(t_s) + " s)");
            }
        }
    }
    return traj;
}

// Differentiable rollout of a network model over consecutive output
// intervals: forward pass records every RK4 stage, backward pass replays the
// tape and turns per-sample loss cotangents into exact discretize-then-
// optimize gradients.
class RolloutEngine {
public:
    RolloutEngine(ModelKind kind, MlpDims dims, const ZScoreScaler* scaler,
                  int sample_id, double dt_out, int substeps);

    void forward_pass(const MlpParams& net, const double* x0, double t_start,
                      int n_intervals);

    // states() holds n_intervals+1 rows after forward_pass
    const Matrix& states() const { return states_; }

    // cotangents: (n_intervals+1) x 7 array of dL/dx at the recorded
    // samples. Accumulates (+=) into d_theta_acc; d_x0 is overwritten.
    void backward_pass(const MlpParams& net, const Matrix& cotangents,
                       double* d_theta_acc, double* d_x0) const;

private:
    struct StepTape {
        std::array<double, 7> x0;
        std::array<NnStageTape, 4> stages;
    };

    void eval_rhs(const MlpParams& net, double t, const double* x, double* dx,
                  NnStageTape& tape) const;

    ModelKind kind_;
    MlpDims dims_;
    const ZScoreScaler* scaler_;
    int sample_id_;
    double dt_out_;
    int substeps_;
    int n_intervals_ = 0;
    Matrix states_;
    std::vector<StepTape> tape_;
};

struct RolloutGradient {
    Trajectory trajectory;
    std::vector<double> d_theta;
    std::array<double, 7> d_x0;
};

// Forward trajectory plus exact reverse-mode gradients of
// sum_i cotangent_i . x_i through every RK4 stage. The cotangent matrix has
// one row per output sample.
RolloutGradient rollout_with_gradient(ModelKind kind, const MlpParams& net,
                                      const ZScoreScaler& scaler,
                                      std::span<const double> x0,
                                      const TimeGrid& grid, int sample_id,
                                      const Matrix& loss_cotangents);

// Loss of the terminal state, differentiable in the state.
struct TerminalLoss {
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
};

struct AdjointResult {
    std::vector<double> d_theta;
    std::array<double, 7> x_t0; // state recovered by the backward pass
    std::array<double, 7> x_t1; // forward terminal state
};

// Continuous adjoint-sensitivity gradient: integrates the augmented system
// [x, a = dL/dx, dL/dtheta] backward from t1 to t0 in a single solver call.
AdjointResult adjoint_gradient(ModelKind kind, const MlpParams& net,
                               const ZScoreScaler& scaler,
                               std::span<const double> x0,
                               const TimeGrid& grid, int sample_id,
                               const TerminalLoss& loss);

} // namespace vst
