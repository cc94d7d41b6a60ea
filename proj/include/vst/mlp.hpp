#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vst {

// Largest hidden layer used anywhere; fixed-size stage buffers rely on it.
inline constexpr int kMaxHidden = 16;

struct MlpDims {
    int n_in = 0;
    int n_hidden = 0;
    int n_out = 0;
    bool operator==(const MlpDims&) const = default;
};

std::size_t param_count(const MlpDims& dims);

// Dense net with one tanh hidden layer and a linear output layer. theta is
// flat, ordered [W1 row-major (n_hidden x n_in), b1, W2 row-major
// (n_out x n_hidden), b2]; this ordering is also the on-disk weight format.
struct MlpParams {
    MlpDims dims;
    std::vector<double> theta;

    std::size_t w1_off() const { return 0; }
    std::size_t b1_off() const
    {
        return static_cast<std::size_t>(dims.n_hidden) * dims.n_in;
    }
    std::size_t w2_off() const { return b1_off() + dims.n_hidden; }
    std::size_t b2_off() const
    {
        return w2_off() + static_cast<std::size_t>(dims.n_out) * dims.n_hidden;
    }

    const double* w1() const { return theta.data() + w1_off(); }
    const double* b1() const { return theta.data() + b1_off(); }
    const double* w2() const { return theta.data() + w2_off(); }
    const double* b2() const { return theta.data() + b2_off(); }

    // throws ConfigError on bad dims, wrong theta length, or non-finite
    // entries
    void validate() const;
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out)) per layer), zero
// biases, fully determined by the seed.
MlpParams init_mlp(const MlpDims& dims, std::uint64_t seed);

// out = W2 tanh(W1 in + b1) + b2. hidden_tanh (size n_hidden), when given,
// captures the activations for backward_from_tape.
void forward(const MlpParams& net, const double* in, double* out,
             double* hidden_tanh = nullptr);

// Checked convenience form; throws ConfigError on dimension mismatch.
std::vector<double> forward(const MlpParams& net, std::span<const double> in);

struct Gradients {
    std::vector<double> d_theta; // ordered like theta
    std::vector<double> d_input; // size n_in
};

// Reverse-mode vector-Jacobian products of forward at `in`:
// d_theta = (dout/dtheta)^T cot, d_input = (dout/din)^T cot.
Gradients backward(const MlpParams& net, std::span<const double> in,
                   std::span<const double> cotangent);

// Hot-path variant reusing captured activations. Accumulates (+=) into
// d_theta_acc (size param_count); d_input (size n_in) is overwritten and may
// be null.
void backward_from_tape(const MlpParams& net, const double* in,
                        const double* hidden_tanh, const double* cotangent,
                        double* d_theta_acc, double* d_input);

} // namespace vst
