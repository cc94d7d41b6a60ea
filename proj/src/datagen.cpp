#include "vst/datagen.hpp"

#include <cstring>

#include "vst/metrics.hpp"

namespace vst {

void DataConfig::validate() const
{
    vehicle.validate();
    tires.validate();
    grid.validate();
    if (!(v_floor > 0.0))
        throw ConfigError("DataConfig: v_floor must be > 0");
    if (!(noise_sigma >= 0.0))
        throw ConfigError("DataConfig: noise_sigma must be >= 0");
    if (!(split_time > grid.t0) || !(split_time < grid.t1))
        throw ConfigError("DataConfig: split_time must lie inside the grid");
}

DriftState drift_initial_state(int sample_id, const VehicleParams& p)
{
    DriftState s{};
    s.v = sample_initial_velocity(sample_id);
    s.omega_f = s.omega_r = s.v / p.r_w;
    return s;
}

Trajectory simulate_reference(int sample_id, const DataConfig& cfg)
{
    cfg.validate();
    const auto x0 = drift_initial_state(sample_id, cfg.vehicle).to_array();
    auto rhs = [&](double t, const double* x, double* dx) {
        const auto d = drift_rhs(DriftState::from_array(x),
                                 input_signal(t, sample_id), cfg.vehicle,
                                 cfg.tires, cfg.v_floor);
        std::memcpy(dx, d.data(), sizeof(d));
    };
    return simulate(rhs, x0, cfg.grid, sample_id);
}

Trajectory simulate_benchmark(int sample_id, const DataConfig& cfg)
{
    cfg.validate();
    SingleTrackState s{};
    s.v = sample_initial_velocity(sample_id);
    const auto x0 = s.to_array();
    auto rhs = [&](double t, const double* x, double* dx) {
        const auto d = single_track_rhs(SingleTrackState::from_array(x),
                                        input_signal(t, sample_id),
                                        cfg.vehicle, cfg.v_floor);
        std::memcpy(dx, d.data(), sizeof(d));
    };
    return simulate(rhs, x0, cfg.grid, sample_id);
}

ZScoreScaler fit_sample3_scaler(const DataConfig& cfg)
{
    return fit_scaler(project_to_states(simulate_reference(3, cfg)));
}

DataSample build_sample(int sample_id, const DataConfig& cfg,
                        const ZScoreScaler& scaler)
{
    DataSample s;
    s.sample_id = sample_id;
    s.clean = simulate_reference(sample_id, cfg);
    s.split_time = cfg.split_time;
    s.noise_sigma = cfg.noise_sigma;
    s.rng_seed = static_cast<std::uint64_t>(sample_id);
    s.noisy = add_noise(project_to_states(s.clean), scaler, cfg.noise_sigma,
                        s.rng_seed);
    s.validate();
    return s;
}

} // namespace vst
