#pragma once

#include <cstddef>

namespace fedcw::kernels {

/// Dense double-precision primitives behind the MLP training path and the
/// soft target updates. One scalar reference implementation plus a SIMD
/// variant selected at runtime.
///
/// Elementwise kernels (axpy, scal, lerp, gemv_t, ger) are defined with the
/// same per-element operation order in every variant and must produce
/// bit-identical results; reduction kernels (dot, gemv) may differ from the
/// reference only by floating-point reassociation.
struct Ops {
    const char* name;

    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a*x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x[i] *= a
    void (*scal)(double a, double* x, std::size_t n);
    // target[i] = tau*online[i] + (1-tau)*target[i]
    void (*lerp)(double* target, const double* online, double tau, std::size_t n);
    // y[r] = bias[r] + sum_c w[r*cols+c]*x[c]   (bias may be null)
    void (*gemv)(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, const double* bias, double* y);
    // dx[c] = sum_r w[r*cols+c]*dy[r]           (dx overwritten)
    void (*gemv_t)(const double* w, std::size_t rows, std::size_t cols,
                   const double* dy, double* dx);
    // w[r*cols+c] += (alpha*dy[r]) * x[c]
    void (*ger)(double* w, std::size_t rows, std::size_t cols,
                const double* dy, const double* x, double alpha);
};

const Ops& scalar_ops();

/// AVX2 variant, or nullptr when the build or the CPU does not support it.
const Ops* avx2_ops();

/// The variant in use. Defaults to the best supported one; the environment
/// variable FEDCW_KERNELS=scalar|avx2 overrides the default choice.
const Ops& active();

/// Force a specific variant (tests and the CLI --kernels flag).
void select(const Ops& ops);

}  // namespace fedcw::kernels
