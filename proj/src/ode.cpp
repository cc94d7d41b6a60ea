#include "vst/ode.hpp"

#include <cmath>
#include <cstring>

namespace vst {

const char* to_string(ModelKind kind)
{
    return kind == ModelKind::node ? "node" : "ude";
}

ModelKind model_kind_from_string(const std::string& s)
{
    if (s == "node")
        return ModelKind::node;
    if (s == "ude")
        return ModelKind::ude;
    throw ConfigError("unknown model kind '" + s + "' (expected node or ude)");
}

MlpDims model_dims(ModelKind kind, int hidden)
{
    if (hidden < 1 || hidden > kMaxHidden)
        throw ConfigError("hidden layer size out of range");
    if (kind == ModelKind::node)
        return {kNumChannels, hidden, kNumStates};
    return {6, hidden, 3};
}

void Trajectory::validate() const
{
    const std::size_t n = times.size();
    if (states.rows != n || inputs.rows != n)
        throw ConfigError("Trajectory: row counts do not match time grid");
    if (n < 2)
        throw ConfigError("Trajectory: need at least two samples");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double step = times[i] - times[i - 1];
        if (!(step > 0.0) || std::abs(step - dt) > 1e-12)
            throw ConfigError("Trajectory: time grid not uniform/increasing");
    }
}

ExogenousInput input_signal(double t, int sample_id)
{
    switch (sample_id) {
    case 1:
        return {0.01 + 0.07 * std::cos(1.3 * t) + 0.08 * std::sin(0.07 * t),
                0.012 * std::sin(0.8 * t)};
    case 2:
        return {0.01 + 0.04 * std::cos(0.7 * t) + 0.12 * std::sin(0.13 * t),
                0.006 * std::sin(1.2 * t) + 0.004 * std::cos(0.3 * t)};
    case 3:
        return {0.01 + 0.05 * std::cos(t) + 0.1 * std::sin(0.1 * t),
                0.02 * std::sin(t)};
    default:
        throw ConfigError("unknown data sample id " +
                          std::to_string(sample_id));
    }
}

double sample_initial_velocity(int sample_id)
{
    switch (sample_id) {
    case 1:
        return 20.0;
    case 2:
        return 28.0;
    case 3:
        return 25.0;
    default:
        throw ConfigError("unknown data sample id " +
                          std::to_string(sample_id));
    }
}

RolloutEngine::RolloutEngine(ModelKind kind, MlpDims dims,
                             const ZScoreScaler* scaler, int sample_id,
                             double dt_out, int substeps)
    : kind_(kind), dims_(dims), scaler_(scaler), sample_id_(sample_id),
      dt_out_(dt_out), substeps_(substeps)
{
    scaler_->require_fitted();
    if (dims_ != model_dims(kind_, dims_.n_hidden))
        throw ConfigError("RolloutEngine: dims do not match model kind");
    if (!(dt_out_ > 0.0) || substeps_ < 1)
        throw ConfigError("RolloutEngine: bad step configuration");
}

void RolloutEngine::eval_rhs(const MlpParams& net, double t, const double* x,
                             double* dx, NnStageTape& tape) const
{
    const ExogenousInput u = input_signal(t, sample_id_);
    if (kind_ == ModelKind::node)
        node_rhs(x, u, net, *scaler_, dx, &tape);
    else
        ude_rhs(x, u, net, *scaler_, dx, &tape);
}

void RolloutEngine::forward_pass(const MlpParams& net, const double* x0,
                                 double t_start, int n_intervals)
{
    n_intervals_ = n_intervals;
    states_ = Matrix(static_cast<std::size_t>(n_intervals) + 1, 7);
    tape_.resize(static_cast<std::size_t>(n_intervals) * substeps_);

    const double h = dt_out_ / substeps_;
    double x[7];
    double k1[7], k2[7], k3[7], k4[7], xs[7];
    std::memcpy(x, x0, sizeof(x));
    std::memcpy(states_.row(0), x, sizeof(x));

    const auto& k = kernels::active();
    for (int i = 0; i < n_intervals; ++i) {
        const double t_i = t_start + i * dt_out_;
        for (int s = 0; s < substeps_; ++s) {
            const double t_s = t_i + s * h;
            StepTape& st = tape_[static_cast<std::size_t>(i) * substeps_ + s];
            std::memcpy(st.x0.data(), x, sizeof(x));

            eval_rhs(net, t_s, x, k1, st.stages[0]);
            std::memcpy(xs, x, sizeof(x));
            k.axpy(0.5 * h, k1, xs, 7);
            eval_rhs(net, t_s + 0.5 * h, xs, k2, st.stages[1]);
            std::memcpy(xs, x, sizeof(x));
            k.axpy(0.5 * h, k2, xs, 7);
            eval_rhs(net, t_s + 0.5 * h, xs, k3, st.stages[2]);
            std::memcpy(xs, x, sizeof(x));
            k.axpy(h, k3, xs, 7);
            eval_rhs(net, t_s + h, xs, k4, st.stages[3]);
            k.rk4_combine(x, k1, k2, k3, k4, h, x, 7);

            for (int c = 0; c < 7; ++c)
                if (!std::isfinite(x[c]))
                    throw NumericError(
                        "rollout diverged: non-finite state while stepping "
                        "from t=" + std::to_string(t_s) + " s");
        }
        std::memcpy(states_.row(static_cast<std::size_t>(i) + 1), x,
                    sizeof(x));
    }
}

void RolloutEngine::backward_pass(const MlpParams& net,
                                  const Matrix& cotangents,
                                  double* d_theta_acc, double* d_x0) const
{
    if (cotangents.rows != static_cast<std::size_t>(n_intervals_) + 1 ||
        cotangents.cols != 7)
        throw ConfigError("backward_pass: cotangent shape mismatch");

    const auto& k = kernels::active();
    const double h = dt_out_ / substeps_;
    const double a_outer = h / 6.0;
    const double a_inner = h / 3.0;

    double lambda[7];
    std::memcpy(lambda, cotangents.row(n_intervals_), sizeof(lambda));

    auto vjp = [&](const NnStageTape& tape, const double* mu, double* e) {
        if (kind_ == ModelKind::node)
            node_rhs_vjp(tape, mu, net, *scaler_, d_theta_acc, e);
        else
            ude_rhs_vjp(tape, mu, net, *scaler_, d_theta_acc, e);
    };

    double mu[7], e1[7], e2[7], e3[7], e4[7];
    for (int i = n_intervals_ - 1; i >= 0; --i) {
        for (int s = substeps_ - 1; s >= 0; --s) {
            const StepTape& st =
                tape_[static_cast<std::size_t>(i) * substeps_ + s];

            // mu_4 = a4 lambda
            for (int c = 0; c < 7; ++c)
                mu[c] = a_outer * lambda[c];
            vjp(st.stages[3], mu, e4);

            // mu_3 = a3 lambda + h e4
            for (int c = 0; c < 7; ++c)
                mu[c] = a_inner * lambda[c] + h * e4[c];
            vjp(st.stages[2], mu, e3);

            // mu_2 = a2 lambda + h/2 e3
            for (int c = 0; c < 7; ++c)
                mu[c] = a_inner * lambda[c] + 0.5 * h * e3[c];
            vjp(st.stages[1], mu, e2);

            // mu_1 = a1 lambda + h/2 e2
            for (int c = 0; c < 7; ++c)
                mu[c] = a_outer * lambda[c] + 0.5 * h * e2[c];
            vjp(st.stages[0], mu, e1);

            for (int c = 0; c < 7; ++c)
                lambda[c] += e1[c] + e2[c] + e3[c] + e4[c];

            for (int c = 0; c < 7; ++c)
                if (!std::isfinite(lambda[c]))
                    throw NumericError(
                        "backward pass diverged at interval " +
                        std::to_string(i) + ", substep " + std::to_string(s));
        }
        k.axpy(1.0, cotangents.row(i), lambda, 7);
    }
    std::memcpy(d_x0, lambda, sizeof(lambda));
}

RolloutGradient rollout_with_gradient(ModelKind kind, const MlpParams& net,
                                      const ZScoreScaler& scaler,
                                      std::span<const double> x0,
                                      const TimeGrid& grid, int sample_id,
                                      const Matrix& loss_cotangents)
{
    grid.validate();
    net.validate();
    if (x0.size() != 7)
        throw ConfigError("rollout_with_gradient: x0 must have 7 states");
    const std::size_t n = grid.n_samples();
    if (loss_cotangents.rows != n || loss_cotangents.cols != 7)
        throw ConfigError("rollout_with_gradient: cotangent shape mismatch");

    RolloutEngine engine(kind, net.dims, &scaler, sample_id, grid.dt_out,
                         grid.substeps);
    engine.forward_pass(net, x0.data(), grid.t0, static_cast<int>(n) - 1);

    RolloutGradient out;
    out.d_theta.assign(net.theta.size(), 0.0);
    engine.backward_pass(net, loss_cotangents, out.d_theta.data(),
                         out.d_x0.data());

    out.trajectory.times.resize(n);
    out.trajectory.states = engine.states();
    out.trajectory.inputs = Matrix(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double t_i = grid.t0 + static_cast<double>(i) * grid.dt_out;
        out.trajectory.times[i] = t_i;
        const ExogenousInput u = input_signal(t_i, sample_id);
        out.trajectory.inputs.at(i, 0) = u.a_x;
        out.trajectory.inputs.at(i, 1) = u.v_delta;
    }
    return out;
}

AdjointResult adjoint_gradient(ModelKind kind, const MlpParams& net,
                               const ZScoreScaler& scaler,
                               std::span<const double> x0,
                               const TimeGrid& grid, int sample_id,
                               const TerminalLoss& loss)
{
    grid.validate();
    net.validate();
    if (x0.size() != 7)
        throw ConfigError("adjoint_gradient: x0 must have 7 states");

    // forward to t1
    auto fwd_rhs = [&](double t, const double* x, double* dx) {
        NnStageTape tape;
        const ExogenousInput u = input_signal(t, sample_id);
        if (kind == ModelKind::node)
            node_rhs(x, u, net, scaler, dx, &tape);
        else
            ude_rhs(x, u, net, scaler, dx, &tape);
    };
    Trajectory fwd = simulate(fwd_rhs, x0, grid, sample_id);

    AdjointResult res;
    std::memcpy(res.x_t1.data(), fwd.states.row(fwd.size() - 1),
                7 * sizeof(double));

    const std::size_t n_theta = net.theta.size();
    std::vector<double> aug(14 + n_theta, 0.0);
    std::memcpy(aug.data(), res.x_t1.data(), 7 * sizeof(double));
    loss.gradient(std::span<const double>(aug.data(), 7),
                  std::span<double>(aug.data() + 7, 7));

    // augmented system d/dt [x, a, g] = [f, -J_x^T a, -J_theta^T a],
    // integrated from t1 down to t0
    auto aug_rhs = [&](double t, const double* s, double* ds) {
        NnStageTape tape;
        const ExogenousInput u = input_signal(t, sample_id);
        if (kind == ModelKind::node)
            node_rhs(s, u, net, scaler, ds, &tape);
        else
            ude_rhs(s, u, net, scaler, ds, &tape);
        std::memset(ds + 7, 0, (7 + n_theta) * sizeof(double));
        double e[7];
        if (kind == ModelKind::node)
            node_rhs_vjp(tape, s + 7, net, scaler, ds + 14, e);
        else
            ude_rhs_vjp(tape, s + 7, net, scaler, ds + 14, e);
        for (int c = 0; c < 7; ++c)
            ds[7 + c] = -e[c];
        for (std::size_t i = 0; i < n_theta; ++i)
            ds[14 + i] = -ds[14 + i];
    };

    const double h = -grid.dt_out / grid.substeps;
    const std::size_t steps = (grid.n_samples() - 1) *
                              static_cast<std::size_t>(grid.substeps);
    Rk4Scratch ws;
    double t = grid.t1;
    for (std::size_t i = 0; i < steps; ++i) {
        rk4_step(aug_rhs, t, h, aug.data(), aug.data(), aug.size(), ws);
        t = grid.t1 + static_cast<double>(i + 1) * h;
        for (int c = 0; c < 14; ++c)
            if (!std::isfinite(aug[c]))
                throw NumericError("adjoint integration diverged at t=" +
                                   std::to_string(t) + " s");
    }

    std::memcpy(res.x_t0.data(), aug.data(), 7 * sizeof(double));
    res.d_theta.assign(aug.begin() + 14, aug.end());
    return res;
}

} // namespace vst
