#pragma once

#include <array>
#include <string>

#include "vst/ode.hpp"
#include "vst/scaler.hpp"

namespace vst {

// Sum of squared errors over z-score-transformed states, all 7 channels and
// all samples. Both trajectories must share the time grid and the 7-state
// layout; throws ConfigError otherwise. Select windows with
// slice_trajectory.
double sse_z(const Trajectory& reference, const Trajectory& estimate,
             const ZScoreScaler& scaler);

// Same sum split per state channel.
std::array<double, kNumStates> per_state_sse_z(const Trajectory& reference,
                                               const Trajectory& estimate,
                                               const ZScoreScaler& scaler);

// Copy of samples [begin, end).
Trajectory slice_trajectory(const Trajectory& traj, std::size_t begin,
                            std::size_t end);

// Drop the wheel-speed columns of a 9-state reference trajectory.
Trajectory project_to_states(const Trajectory& drift);

struct EvalReport {
    std::string model;
    double train_sse = 0.0;
    double val_sse = 0.0;
    double improvement_vs_ode = 0.0; // 1 - train_sse/ode_train_sse
    std::array<double, kNumStates> per_state_train_sse{};
    std::array<double, kNumStates> per_state_val_sse{};
};

} // namespace vst
