#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "vst/mlp.hpp"
#include "vst/scaler.hpp"

// Right-hand sides of the four single-track models: the 9-state drift
// reference, the simplified 7-state benchmark, and the two network-based
// models (black-box and hybrid). All functions are pure.

namespace vst {

inline constexpr double kDefaultVFloor = 0.1; // [m/s], hard error below

struct VehicleParams {
    double m;    // vehicle mass [kg]
    double l_f;  // CoG to front axle [m]
    double l_r;  // CoG to rear axle [m]
    double mu;   // tire-road friction [-]
    double C_f;  // front cornering stiffness [1/rad]
    double C_r;  // rear cornering stiffness [1/rad]
    double h;    // CoG height [m]
    double I_z;  // yaw inertia [kg m^2]
    double I_w;  // wheel inertia [kg m^2]
    double t_e;  // engine torque split front/rear [-]
    double t_b;  // brake torque split front/rear [-]
    double r_w;  // effective tire radius [m]
    double g;    // gravitational constant [m/s^2]

    static VehicleParams reference(); // BMW-320i-class parameter set
    void validate() const;            // throws ConfigError

    double wheelbase() const { return l_f + l_r; }
    double front_axle_load() const { return m * g * l_r / wheelbase(); }
    double rear_axle_load() const { return m * g * l_f / wheelbase(); }
};

// Magic-formula shape parameters, shared by both axles and directions.
// Forces are scaled by the static axle loads.
struct TireCoefficients {
    double B = 10.0;
    double C = 1.9;
    double D = 1.0;
    double E = 0.97;
    void validate() const;
};

struct ExogenousInput {
    double a_x = 0.0;     // longitudinal acceleration [m/s^2]
    double v_delta = 0.0; // steer angle rate [rad/s]
};

struct DriftState {
    double x = 0.0;       // position [m]
    double y = 0.0;       // position [m]
    double psi = 0.0;     // yaw angle [rad]
    double delta = 0.0;   // steer angle [rad]
    double v = 0.0;       // velocity [m/s]
    double beta = 0.0;    // slip angle [rad]
    double omega = 0.0;   // yaw rate [rad/s]
    double omega_f = 0.0; // front wheel speed [rad/s]
    double omega_r = 0.0; // rear wheel speed [rad/s]

    std::array<double, 9> to_array() const
    {
        return {x, y, psi, delta, v, beta, omega, omega_f, omega_r};
    }
    static DriftState from_array(const double* a)
    {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
    }
};

struct SingleTrackState {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double delta = 0.0;
    double v = 0.0;
    double beta = 0.0;
    double omega = 0.0;

    std::array<double, 7> to_array() const
    {
        return {x, y, psi, delta, v, beta, omega};
    }
    static SingleTrackState from_array(const double* a)
    {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }
};

// D sin(C atan(B s - E (B s - atan(B s)))); odd in s.
double magic_formula(double slip, const TireCoefficients& tires);

// Engine/brake torque from commanded longitudinal acceleration:
// T = m a_x r_w routed to the engine channel for a_x >= 0, to the brake
// channel otherwise. Returns (T_e, T_b).
std::pair<double, double> torque_from_accel(double a_x,
                                            const VehicleParams& p);

// Pacejka axle forces (F_fx, F_fy, F_rx, F_ry) of the drift model.
std::array<double, 4> tire_forces(const DriftState& x,
                                  const ExogenousInput& u,
                                  const VehicleParams& p,
                                  const TireCoefficients& tires,
                                  double v_floor = kDefaultVFloor);

// 9-state single-track-drift reference dynamics.
std::array<double, 9> drift_rhs(const DriftState& x, const ExogenousInput& u,
                                const VehicleParams& p,
                                const TireCoefficients& tires,
                                double v_floor = kDefaultVFloor);

// Linear lateral axle forces (F_fy, F_ry) of the simplified model.
std::pair<double, double> lateral_tire_forces(const SingleTrackState& x,
                                              const VehicleParams& p,
                                              double v_floor = kDefaultVFloor);

// 7-state simplified single-track benchmark dynamics.
std::array<double, 7> single_track_rhs(const SingleTrackState& x,
                                       const ExogenousInput& u,
                                       const VehicleParams& p,
                                       double v_floor = kDefaultVFloor);

// First four (kinematic) state derivatives, shared verbatim by the drift,
// benchmark, and hybrid models so their rows agree bit-exactly.
inline void kinematic_rows(double v, double psi, double beta, double omega,
                           double v_delta, double* dx)
{
    dx[0] = v * std::cos(psi + beta);
    dx[1] = v * std::sin(psi + beta);
    dx[2] = omega;
    dx[3] = v_delta;
}

// Per-stage capture of one network evaluation, consumed by the VJPs.
struct NnStageTape {
    std::array<double, 7> state;
    std::array<double, kNumChannels> zin;
    std::array<double, kMaxHidden> hidden;
};

// Black-box model: all seven derivatives from NN(z([x, u])). Network dims
// must be (9, h, 7).
void node_rhs(const double* x, const ExogenousInput& u, const MlpParams& net,
              const ZScoreScaler& scaler, double* dx,
              NnStageTape* tape = nullptr);

// Hybrid model: kinematic rows 1-4 plus NN(z([delta, v, beta, omega, a_x,
// v_delta])) for rows 5-7. Network dims must be (6, h, 3).
void ude_rhs(const double* x, const ExogenousInput& u, const MlpParams& net,
             const ZScoreScaler& scaler, double* dx,
             NnStageTape* tape = nullptr);

// Reverse-mode VJPs of the two network models: accumulate (df/dtheta)^T mu
// into d_theta_acc and write e = (df/dx)^T mu.
void node_rhs_vjp(const NnStageTape& tape, const double* mu,
                  const MlpParams& net, const ZScoreScaler& scaler,
                  double* d_theta_acc, double* e);
void ude_rhs_vjp(const NnStageTape& tape, const double* mu,
                 const MlpParams& net, const ZScoreScaler& scaler,
                 double* d_theta_acc, double* e);

// Checked convenience overloads.
std::array<double, 7> node_rhs(const SingleTrackState& x,
                               const ExogenousInput& u, const MlpParams& net,
                               const ZScoreScaler& scaler);
std::array<double, 7> ude_rhs(const SingleTrackState& x,
                              const ExogenousInput& u, const MlpParams& net,
                              const ZScoreScaler& scaler);

} // namespace vst
