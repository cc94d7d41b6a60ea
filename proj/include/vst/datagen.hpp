#pragma once

#include "vst/dynamics.hpp"
#include "vst/ode.hpp"
#include "vst/training.hpp"

namespace vst {

// Numeric configuration of the reference experiment.
struct DataConfig {
    VehicleParams vehicle = VehicleParams::reference();
    TireCoefficients tires{};
    TimeGrid grid{0.0, 100.0, 0.1, 10};
    double v_floor = kDefaultVFloor;
    double split_time = 70.0;
    double noise_sigma = 0.025;

    void validate() const;
};

// Only the initial velocity is nonzero, except that the wheels start at
// rolling equilibrium v0/r_w (a stationary wheel at 25 m/s would mean full
// longitudinal slip and the reference car would brake itself below the
// velocity floor within seconds).
DriftState drift_initial_state(int sample_id, const VehicleParams& p);

// 9-state single-track-drift reference trajectory for one sample.
Trajectory simulate_reference(int sample_id, const DataConfig& cfg);

// 7-state simplified-model benchmark from the same initial state over the
// same grid.
Trajectory simulate_benchmark(int sample_id, const DataConfig& cfg);

// Scaler fit on the 7-state projection (plus inputs) of clean sample three.
ZScoreScaler fit_sample3_scaler(const DataConfig& cfg);

// Reference trajectory + noisy projection; noise seed = sample id.
DataSample build_sample(int sample_id, const DataConfig& cfg,
                        const ZScoreScaler& scaler);

} // namespace vst
