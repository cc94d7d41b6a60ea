#pragma once

#include <array>
#include <cmath>

#include "vst/errors.hpp"

namespace vst {

inline constexpr int kNumStates = 7;   // x, y, psi, delta, v, beta, omega
inline constexpr int kNumInputs = 2;   // a_x, v_delta
inline constexpr int kNumChannels = kNumStates + kNumInputs;

// Per-channel z-score transform over the 7 model states followed by the two
// exogenous inputs. Fit on data sample three; used for network inputs, noise
// injection, and every SSE/continuity evaluation.
struct ZScoreScaler {
    std::array<double, kNumChannels> means{};
    std::array<double, kNumChannels> stds{};
    std::array<double, kNumChannels> inv_stds{};
    bool fitted = false;

    void set(const std::array<double, kNumChannels>& mean,
             const std::array<double, kNumChannels>& std_dev)
    {
        for (double s : std_dev)
            if (!(s > 0.0) || !std::isfinite(s))
                throw ConfigError("ZScoreScaler: channel std must be > 0");
        means = mean;
        stds = std_dev;
        for (int i = 0; i < kNumChannels; ++i)
            inv_stds[i] = 1.0 / stds[i];
        fitted = true;
    }

    void require_fitted() const
    {
        if (!fitted)
            throw ConfigError("ZScoreScaler used before being fitted");
    }

    // z-transform the first n channels (states first, inputs after)
    void transform(const double* x, double* z, int n) const
    {
        for (int i = 0; i < n; ++i)
            z[i] = (x[i] - means[i]) * inv_stds[i];
    }

    void inverse(const double* z, double* x, int n) const
    {
        for (int i = 0; i < n; ++i)
            x[i] = z[i] * stds[i] + means[i];
    }
};

} // namespace vst
