#include "vst/metrics.hpp"

#include <cmath>
#include <cstring>

#include "vst/kernels.hpp"

namespace vst {

namespace {

void check_pair(const Trajectory& ref, const Trajectory& est)
{
    if (ref.states.cols != kNumStates || est.states.cols != kNumStates)
        throw ConfigError("sse_z: trajectories must have the 7-state layout");
    if (ref.size() != est.size())
        throw ConfigError("sse_z: trajectory lengths differ");
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (std::abs(ref.times[i] - est.times[i]) > 1e-9)
            throw ConfigError("sse_z: time grids do not match at index " +
                              std::to_string(i));
}

} // namespace

double sse_z(const Trajectory& reference, const Trajectory& estimate,
             const ZScoreScaler& scaler)
{
    scaler.require_fitted();
    check_pair(reference, estimate);
    const auto& k = kernels::active();
    double total = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i)
        total += k.sse_scaled(reference.states.row(i), estimate.states.row(i),
                              scaler.inv_stds.data(), kNumStates);
    return total;
}

std::array<double, kNumStates> per_state_sse_z(const Trajectory& reference,
                                               const Trajectory& estimate,
                                               const ZScoreScaler& scaler)
{
    scaler.require_fitted();
    check_pair(reference, estimate);
    std::array<double, kNumStates> out{};
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double* a = reference.states.row(i);
        const double* b = estimate.states.row(i);
        for (int c = 0; c < kNumStates; ++c) {
            const double d = scaler.inv_stds[c] * (a[c] - b[c]);
            out[c] += d * d;
        }
    }
    return out;
}

Trajectory slice_trajectory(const Trajectory& traj, std::size_t begin,
                            std::size_t end)
{
    if (begin >= end || end > traj.size())
        throw ConfigError("slice_trajectory: bad window [" +
                          std::to_string(begin) + ", " + std::to_string(end) +
                          ") for " + std::to_string(traj.size()) + " samples");
    Trajectory out;
    const std::size_t n = end - begin;
    out.times.assign(traj.times.begin() + begin, traj.times.begin() + end);
    out.states = Matrix(n, traj.states.cols);
    out.inputs = Matrix(n, traj.inputs.cols);
    std::memcpy(out.states.data.data(), traj.states.row(begin),
                n * traj.states.cols * sizeof(double));
    std::memcpy(out.inputs.data.data(), traj.inputs.row(begin),
                n * traj.inputs.cols * sizeof(double));
    return out;
}

Trajectory project_to_states(const Trajectory& drift)
{
    if (drift.states.cols != 9)
        throw ConfigError("project_to_states: expected a 9-state trajectory");
    Trajectory out;
    out.times = drift.times;
    out.inputs = drift.inputs;
    out.states = Matrix(drift.size(), kNumStates);
    for (std::size_t i = 0; i < drift.size(); ++i)
        std::memcpy(out.states.row(i), drift.states.row(i),
                    kNumStates * sizeof(double));
    return out;
}

} // namespace vst
