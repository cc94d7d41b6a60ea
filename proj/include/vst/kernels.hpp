#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops of the model/training pipeline. Every kernel has
// a scalar reference implementation and, on x86-64, an AVX2+FMA variant.
// The active variant is chosen once at runtime (CPU probe, overridable) and
// both variants are equivalence-tested against each other.
//
// Matrices are row-major. All pointers must be non-aliasing unless a kernel
// documents otherwise.

namespace vst::kernels {

struct Ops {
    const char* name;

    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // y = W x + b, W is rows x cols, y has rows entries
    void (*matvec_bias)(const double* W, const double* x, const double* b,
                        double* y, std::size_t rows, std::size_t cols);

    // y += W^T v, v has rows entries, y has cols entries
    void (*matvec_t_acc)(const double* W, const double* v, double* y,
                         std::size_t rows, std::size_t cols);

    // A += u v^T, A is rows x cols
    void (*outer_acc)(double* A, const double* u, const double* v,
                      std::size_t rows, std::size_t cols);

    // y[i] = tanh(x[i])
    void (*tanh_vec)(const double* x, double* y, std::size_t n);

    // dx[i] = (1 - t[i]^2) * dy[i], t = tanh activations from the forward pass
    void (*tanh_bwd)(const double* t, const double* dy, double* dx,
                     std::size_t n);

    // y += a x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    // out = x + h/6 (k1 + 2 k2 + 2 k3 + k4)
    void (*rk4_combine)(const double* x, const double* k1, const double* k2,
                        const double* k3, const double* k4, double h,
                        double* out, std::size_t n);

    // sum_i (a[i]-b[i])^2
    double (*sse)(const double* a, const double* b, std::size_t n);

    // sum_i (w[i]*(a[i]-b[i]))^2
    double (*sse_scaled)(const double* a, const double* b, const double* w,
                         std::size_t n);

    // bias-corrected ADAM step; bc1 = 1-beta1^t, bc2 = 1-beta2^t
    void (*adam_update)(double* p, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bc1, double bc2);

    // y[i] = (x[i] - mean[i]) * inv_std[i]
    void (*zscore)(const double* x, const double* mean, const double* inv_std,
                   double* y, std::size_t n);
};

const Ops& scalar_ops();
bool avx2_available();           // CPU + build both support the AVX2 variant
const Ops* avx2_ops();           // nullptr when not compiled in

// Active backend. Resolution order on first use: VST_BACKEND environment
// variable ("scalar"/"avx2"/"auto"), then CPU probe. select_backend("...")
// accepts the same names and throws vst::ConfigError on unknown/unavailable.
const Ops& active();
void select_backend(const std::string& name);
const char* active_name();

} // namespace vst::kernels
