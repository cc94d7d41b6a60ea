#include "vst/dynamics.hpp"

#include <cmath>
#include <cstring>

#include "vst/errors.hpp"
#include "vst/kernels.hpp"

namespace vst {

VehicleParams VehicleParams::reference()
{
    VehicleParams p{};
    p.m = 1225.0;
    p.l_f = 0.883;
    p.l_r = 1.508;
    p.mu = 1.048;
    p.C_f = 20.89;
    p.C_r = 20.89;
    p.h = 0.557;
    p.I_z = 1538.0;
    p.I_w = 1700.0;
    p.t_e = 1.0;
    p.t_b = 0.76;
    p.r_w = 0.344;
    p.g = 9.81;
    return p;
}

void VehicleParams::validate() const
{
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(m) || !positive(l_f) || !positive(l_r) || !positive(I_z) ||
        !positive(I_w) || !positive(r_w) || !positive(h) || !positive(g) ||
        !positive(C_f) || !positive(C_r))
        throw ConfigError("VehicleParams: masses/lengths/inertias/stiffness "
                          "must be strictly positive");
    if (!(mu > 0.0))
        throw ConfigError("VehicleParams: mu must be > 0");
    if (!(t_e >= 0.0 && t_e <= 1.0 && t_b >= 0.0 && t_b <= 1.0))
        throw ConfigError("VehicleParams: torque splits must lie in [0, 1]");
}

void TireCoefficients::validate() const
{
    if (!(B > 0.0) || !(C > 0.0) || !(D > 0.0))
        throw ConfigError("TireCoefficients: B, C, D must be > 0");
    if (!std::isfinite(E))
        throw ConfigError("TireCoefficients: E must be finite");
}

double magic_formula(double slip, const TireCoefficients& t)
{
    const double bs = t.B * slip;
    return t.D * std::sin(t.C * std::atan(bs - t.E * (bs - std::atan(bs))));
}

std::pair<double, double> torque_from_accel(double a_x,
                                            const VehicleParams& p)
{
    if (!std::isfinite(a_x))
        throw NumericError("torque_from_accel: non-finite a_x");
    const double torque = p.m * a_x * p.r_w;
    if (a_x >= 0.0)
        return {torque, 0.0};
    return {0.0, torque};
}

namespace {

void check_velocity(double v, double v_floor, const char* who)
{
    if (!std::isfinite(v))
        throw NumericError(std::string(who) + ": non-finite velocity");
    if (v < v_floor)
        throw NumericError(std::string(who) + ": velocity " +
                           std::to_string(v) + " m/s below singularity floor " +
                           std::to_string(v_floor));
}

void check_finite(const double* x, int n, const char* who)
{
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(x[i]))
            throw NumericError(std::string(who) +
                               ": non-finite state component " +
                               std::to_string(i));
}

} // namespace

std::array<double, 4> tire_forces(const DriftState& x,
                                  const ExogenousInput& u,
                                  const VehicleParams& p,
                                  const TireCoefficients& tires,
                                  double v_floor)
{
    (void)u;
    check_velocity(x.v, v_floor, "tire_forces");

    const double cb = std::cos(x.beta);
    const double sb = std::sin(x.beta);

    // wheel-frame longitudinal velocities
    const double u_f = x.v * cb * std::cos(x.delta) +
                       (x.v * sb + p.l_f * x.omega) * std::sin(x.delta);
    const double u_r = x.v * cb;

    // longitudinal slip per axle
    const double s_f = (p.r_w * x.omega_f - u_f) / std::max(u_f, v_floor);
    const double s_r = (p.r_w * x.omega_r - u_r) / std::max(u_r, v_floor);

    // lateral slip angles, no small-angle approximation
    const double alpha_f =
        x.delta - std::atan2(x.v * sb + p.l_f * x.omega, x.v * cb);
    const double alpha_r = -std::atan2(x.v * sb - p.l_r * x.omega, x.v * cb);

    const double f_zf = p.front_axle_load();
    const double f_zr = p.rear_axle_load();
    return {
        magic_formula(s_f, tires) * f_zf,
        magic_formula(alpha_f, tires) * f_zf,
        magic_formula(s_r, tires) * f_zr,
        magic_formula(alpha_r, tires) * f_zr,
    };
}

std::array<double, 9> drift_rhs(const DriftState& x, const ExogenousInput& u,
                                const VehicleParams& p,
                                const TireCoefficients& tires,
                                double v_floor)
{
    const auto xs = x.to_array();
    check_finite(xs.data(), 9, "drift_rhs");
    if (!std::isfinite(u.a_x) || !std::isfinite(u.v_delta))
        throw NumericError("drift_rhs: non-finite input");
    check_velocity(x.v, v_floor, "drift_rhs");

    const auto [F_fx, F_fy, F_rx, F_ry] = tire_forces(x, u, p, tires, v_floor);
    const auto [T_e, T_b] = torque_from_accel(u.a_x, p);

    const double cbd = std::cos(x.beta - x.delta);
    const double sbd = std::sin(x.beta - x.delta);
    const double cb = std::cos(x.beta);
    const double sb = std::sin(x.beta);

    std::array<double, 9> dx;
    kinematic_rows(x.v, x.psi, x.beta, x.omega, u.v_delta, dx.data());
    dx[4] = (F_fx * cbd + F_fy * sbd + F_rx * cb + F_ry * sb) / p.m;
    dx[5] = (F_fy * cbd - F_fx * sbd - F_rx * sb + F_ry * cb) / (p.m * x.v) -
            x.omega;
    dx[6] = ((F_fx * std::sin(x.delta) + F_fy * std::cos(x.delta)) * p.l_f -
             F_ry * p.l_r) /
            p.I_z;
    dx[7] = (-p.r_w * F_fx + p.t_b * T_b + p.t_e * T_e) / p.I_w;
    dx[8] = (-p.r_w * F_rx + (1.0 - p.t_b) * T_b + (1.0 - p.t_e) * T_e) / p.I_w;
    return dx;
}

std::pair<double, double> lateral_tire_forces(const SingleTrackState& x,
                                              const VehicleParams& p,
                                              double v_floor)
{
    check_velocity(x.v, v_floor, "lateral_tire_forces");
    const double f_fy = p.mu * p.C_f * p.front_axle_load() *
                        (x.delta - x.omega * p.l_f / x.v - x.beta);
    const double f_ry =
        p.mu * p.C_r * p.rear_axle_load() * (x.omega * p.l_r / x.v - x.beta);
    return {f_fy, f_ry};
}

std::array<double, 7> single_track_rhs(const SingleTrackState& x,
                                       const ExogenousInput& u,
                                       const VehicleParams& p, double v_floor)
{
    const auto xs = x.to_array();
    check_finite(xs.data(), 7, "single_track_rhs");
    check_velocity(x.v, v_floor, "single_track_rhs");

    const auto [F_fy, F_ry] = lateral_tire_forces(x, p, v_floor);
    std::array<double, 7> dx;
    kinematic_rows(x.v, x.psi, x.beta, x.omega, u.v_delta, dx.data());
    dx[4] = u.a_x;
    dx[5] = (F_fy + F_ry) / (p.m * x.v) - x.omega;
    dx[6] = (F_fy * p.l_f - F_ry * p.l_r) / p.I_z;
    return dx;
}

namespace {

void require_dims(const MlpParams& net, int n_in, int n_out, const char* who)
{
    if (net.dims.n_in != n_in || net.dims.n_out != n_out)
        throw ConfigError(std::string(who) + ": network dims (" +
                          std::to_string(net.dims.n_in) + ",h," +
                          std::to_string(net.dims.n_out) + ") do not match (" +
                          std::to_string(n_in) + ",h," +
                          std::to_string(n_out) + ")");
}

} // namespace

void node_rhs(const double* x, const ExogenousInput& u, const MlpParams& net,
              const ZScoreScaler& scaler, double* dx, NnStageTape* tape)
{
    require_dims(net, kNumChannels, kNumStates, "node_rhs");
    scaler.require_fitted();

    NnStageTape local;
    NnStageTape& t = tape ? *tape : local;
    std::memcpy(t.state.data(), x, sizeof(double) * kNumStates);
    scaler.transform(x, t.zin.data(), kNumStates);
    t.zin[7] = (u.a_x - scaler.means[7]) * scaler.inv_stds[7];
    t.zin[8] = (u.v_delta - scaler.means[8]) * scaler.inv_stds[8];
    forward(net, t.zin.data(), dx, t.hidden.data());
}

void ude_rhs(const double* x, const ExogenousInput& u, const MlpParams& net,
             const ZScoreScaler& scaler, double* dx, NnStageTape* tape)
{
    require_dims(net, 6, 3, "ude_rhs");
    scaler.require_fitted();

    NnStageTape local;
    NnStageTape& t = tape ? *tape : local;
    std::memcpy(t.state.data(), x, sizeof(double) * kNumStates);
    // z-scored [delta, v, beta, omega, a_x, v_delta]
    for (int i = 0; i < 4; ++i)
        t.zin[i] = (x[3 + i] - scaler.means[3 + i]) * scaler.inv_stds[3 + i];
    t.zin[4] = (u.a_x - scaler.means[7]) * scaler.inv_stds[7];
    t.zin[5] = (u.v_delta - scaler.means[8]) * scaler.inv_stds[8];

    kinematic_rows(x[4], x[2], x[5], x[6], u.v_delta, dx);
    forward(net, t.zin.data(), dx + 4, t.hidden.data());
}

void node_rhs_vjp(const NnStageTape& tape, const double* mu,
                  const MlpParams& net, const ZScoreScaler& scaler,
                  double* d_theta_acc, double* e)
{
    double d_in[kNumChannels];
    backward_from_tape(net, tape.zin.data(), tape.hidden.data(), mu,
                       d_theta_acc, d_in);
    for (int i = 0; i < kNumStates; ++i)
        e[i] = d_in[i] * scaler.inv_stds[i];
}

void ude_rhs_vjp(const NnStageTape& tape, const double* mu,
                 const MlpParams& net, const ZScoreScaler& scaler,
                 double* d_theta_acc, double* e)
{
    const double v = tape.state[4];
    const double heading = tape.state[2] + tape.state[5]; // psi + beta
    const double c = std::cos(heading);
    const double s = std::sin(heading);

    // kinematic rows
    const double along = c * mu[0] + s * mu[1];        // d/dv
    const double across = v * (-s * mu[0] + c * mu[1]); // d/dpsi = d/dbeta
    e[0] = 0.0;
    e[1] = 0.0;
    e[2] = across;
    e[3] = 0.0;
    e[4] = along;
    e[5] = across;
    e[6] = mu[2];

    // network rows (derivatives of v, beta, omega)
    double d_in[6];
    backward_from_tape(net, tape.zin.data(), tape.hidden.data(), mu + 4,
                       d_theta_acc, d_in);
    for (int i = 0; i < 4; ++i)
        e[3 + i] += d_in[i] * scaler.inv_stds[3 + i];
}

std::array<double, 7> node_rhs(const SingleTrackState& x,
                               const ExogenousInput& u, const MlpParams& net,
                               const ZScoreScaler& scaler)
{
    net.validate();
    const auto xs = x.to_array();
    std::array<double, 7> dx;
    node_rhs(xs.data(), u, net, scaler, dx.data());
    return dx;
}

std::array<double, 7> ude_rhs(const SingleTrackState& x,
                              const ExogenousInput& u, const MlpParams& net,
                              const ZScoreScaler& scaler)
{
    net.validate();
    const auto xs = x.to_array();
    std::array<double, 7> dx;
    ude_rhs(xs.data(), u, net, scaler, dx.data());
    return dx;
}

} // namespace vst
