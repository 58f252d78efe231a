#include "fedcw/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace fedcw::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += x[i] * y[i];
    }
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void scal_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        x[i] *= a;
    }
}

void lerp_scalar(double* target, const double* online, double tau, std::size_t n) {
    const double keep = 1.0 - tau;
    for (std::size_t i = 0; i < n; ++i) {
        target[i] = tau * online[i] + keep * target[i];
    }
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, const double* bias, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? bias[r] : 0.0;
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            acc += row[c] * x[c];
        }
        y[r] = acc;
    }
}

void gemv_t_scalar(const double* w, std::size_t rows, std::size_t cols,
                   const double* dy, double* dx) {
    std::memset(dx, 0, cols * sizeof(double));
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dy[r];
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            dx[c] += g * row[c];
        }
    }
}

void ger_scalar(double* w, std::size_t rows, std::size_t cols,
                const double* dy, const double* x, double alpha) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double coef = alpha * dy[r];
        double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] += coef * x[c];
        }
    }
}

constexpr Ops kScalarOps = {
    "scalar",   dot_scalar,    axpy_scalar, scal_scalar,
    lerp_scalar, gemv_scalar, gemv_t_scalar, ger_scalar,
};

const Ops* pick_default() {
    if (const char* env = std::getenv("FEDCW_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) {
            return &kScalarOps;
        }
        if (std::strcmp(env, "avx2") == 0 && avx2_ops()) {
            return avx2_ops();
        }
    }
    if (const Ops* simd = avx2_ops()) {
        return simd;
    }
    return &kScalarOps;
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

const Ops& scalar_ops() {
    return kScalarOps;
}

#if !defined(FEDCW_WITH_AVX2)
const Ops* avx2_ops() {
    return nullptr;
}
#endif

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = pick_default();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void select(const Ops& ops) {
    g_active.store(&ops, std::memory_order_release);
}

}  // namespace fedcw::kernels
