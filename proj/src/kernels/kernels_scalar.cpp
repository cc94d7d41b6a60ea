// Scalar reference implementations. These define the semantics every other
// backend is tested against.

#include "vst/kernels.hpp"

#include <cmath>

namespace vst::kernels::scalar {

namespace {

double dot(const double* a, const double* b, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

void matvec_bias(const double* W, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot(W + r * cols, x, cols) + b[r];
}

void matvec_t_acc(const double* W, const double* v, double* y,
                  std::size_t rows, std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = W + r * cols;
        const double vr = v[r];
        for (std::size_t c = 0; c < cols; ++c)
            y[c] += vr * row[c];
    }
}

void outer_acc(double* A, const double* u, const double* v, std::size_t rows,
               std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = A + r * cols;
        const double ur = u[r];
        for (std::size_t c = 0; c < cols; ++c)
            row[c] += ur * v[c];
    }
}

void tanh_vec(const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] = std::tanh(x[i]);
}

void tanh_bwd(const double* t, const double* dy, double* dx, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        dx[i] = (1.0 - t[i] * t[i]) * dy[i];
}

void axpy(double a, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void rk4_combine(const double* x, const double* k1, const double* k2,
                 const double* k3, const double* k4, double h, double* out,
                 std::size_t n)
{
    const double w = h / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double sse(const double* a, const double* b, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sse_scaled(const double* a, const double* b, const double* w,
                  std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = w[i] * (a[i] - b[i]);
        s += d * d;
    }
    return s;
}

void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2)
{
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void zscore(const double* x, const double* mean, const double* inv_std,
            double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] = (x[i] - mean[i]) * inv_std[i];
}

} // namespace

} // namespace vst::kernels::scalar

namespace vst::kernels {

const Ops& scalar_ops()
{
    static const Ops ops = {
        "scalar",
        scalar::dot,
        scalar::matvec_bias,
        scalar::matvec_t_acc,
        scalar::outer_acc,
        scalar::tanh_vec,
        scalar::tanh_bwd,
        scalar::axpy,
        scalar::rk4_combine,
        scalar::sse,
        scalar::sse_scaled,
        scalar::adam_update,
        scalar::zscore,
    };
    return ops;
}

} // namespace vst::kernels
