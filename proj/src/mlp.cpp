#include "vst/mlp.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "vst/errors.hpp"
#include "vst/kernels.hpp"

namespace vst {

std::size_t param_count(const MlpDims& d)
{
    return static_cast<std::size_t>(d.n_in) * d.n_hidden + d.n_hidden +
           static_cast<std::size_t>(d.n_hidden) * d.n_out + d.n_out;
}

void MlpParams::validate() const
{
    if (dims.n_in < 1 || dims.n_hidden < 1 || dims.n_out < 1)
        throw ConfigError("MlpParams: layer sizes must be >= 1");
    if (dims.n_hidden > kMaxHidden)
        throw ConfigError("MlpParams: hidden layer larger than kMaxHidden");
    if (theta.size() != param_count(dims))
        throw ConfigError("MlpParams: theta length does not match dims");
    for (double v : theta)
        if (!std::isfinite(v))
            throw ConfigError("MlpParams: non-finite weight");
}

namespace {

// [0,1) from the top 53 bits; keeps init reproducible across platforms
// (std::uniform_real_distribution is implementation-defined).
inline double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

MlpParams init_mlp(const MlpDims& dims, std::uint64_t seed)
{
    MlpParams net;
    net.dims = dims;
    net.theta.assign(param_count(dims), 0.0);
    net.validate();

    std::mt19937_64 rng(seed);
    auto fill_glorot = [&](double* w, std::size_t n, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (std::size_t i = 0; i < n; ++i)
            w[i] = limit * (2.0 * unit_uniform(rng) - 1.0);
    };
    fill_glorot(net.theta.data() + net.w1_off(),
                static_cast<std::size_t>(dims.n_hidden) * dims.n_in,
                dims.n_in, dims.n_hidden);
    fill_glorot(net.theta.data() + net.w2_off(),
                static_cast<std::size_t>(dims.n_out) * dims.n_hidden,
                dims.n_hidden, dims.n_out);
    return net;
}

void forward(const MlpParams& net, const double* in, double* out,
             double* hidden_tanh)
{
    const auto& k = kernels::active();
    const MlpDims& d = net.dims;
    double pre[kMaxHidden];
    double t_local[kMaxHidden];
    double* t = hidden_tanh ? hidden_tanh : t_local;
    k.matvec_bias(net.w1(), in, net.b1(), pre, d.n_hidden, d.n_in);
    k.tanh_vec(pre, t, d.n_hidden);
    k.matvec_bias(net.w2(), t, net.b2(), out, d.n_out, d.n_hidden);
}

std::vector<double> forward(const MlpParams& net, std::span<const double> in)
{
    net.validate();
    if (in.size() != static_cast<std::size_t>(net.dims.n_in))
        throw ConfigError("forward: input length does not match n_in");
    std::vector<double> out(net.dims.n_out);
    forward(net, in.data(), out.data());
    return out;
}

void backward_from_tape(const MlpParams& net, const double* in,
                        const double* hidden_tanh, const double* cotangent,
                        double* d_theta_acc, double* d_input)
{
    const auto& k = kernels::active();
    const MlpDims& d = net.dims;

    // output layer
    k.axpy(1.0, cotangent, d_theta_acc + net.b2_off(), d.n_out);
    k.outer_acc(d_theta_acc + net.w2_off(), cotangent, hidden_tanh, d.n_out,
                d.n_hidden);

    double d_t[kMaxHidden] = {};
    k.matvec_t_acc(net.w2(), cotangent, d_t, d.n_out, d.n_hidden);

    double d_pre[kMaxHidden];
    k.tanh_bwd(hidden_tanh, d_t, d_pre, d.n_hidden);

    // hidden layer
    k.axpy(1.0, d_pre, d_theta_acc + net.b1_off(), d.n_hidden);
    k.outer_acc(d_theta_acc + net.w1_off(), d_pre, in, d.n_hidden, d.n_in);

    if (d_input) {
        std::memset(d_input, 0, sizeof(double) * d.n_in);
        k.matvec_t_acc(net.w1(), d_pre, d_input, d.n_hidden, d.n_in);
    }
}

Gradients backward(const MlpParams& net, std::span<const double> in,
                   std::span<const double> cotangent)
{
    net.validate();
    if (in.size() != static_cast<std::size_t>(net.dims.n_in))
        throw ConfigError("backward: input length does not match n_in");
    if (cotangent.size() != static_cast<std::size_t>(net.dims.n_out))
        throw ConfigError("backward: cotangent length does not match n_out");

    double out[kMaxHidden];
    double hidden[kMaxHidden];
    static_assert(kMaxHidden >= 7);
    forward(net, in.data(), out, hidden);

    Gradients g;
    g.d_theta.assign(net.theta.size(), 0.0);
    g.d_input.assign(net.dims.n_in, 0.0);
    backward_from_tape(net, in.data(), hidden, cotangent.data(),
                       g.d_theta.data(), g.d_input.data());
    return g;
}

} // namespace vst
