// AVX2 variants. Built as a separate translation unit with -mavx2 (no -mfma:
// the elementwise kernels must round exactly like the scalar reference).

#include "fedcw/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

#include <cstring>

namespace fedcw::kernels {

namespace {

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        acc1 = _mm256_add_pd(acc1,
                             _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        total += x[i] * y[i];
    }
    return total;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void scal_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    }
    for (; i < n; ++i) {
        x[i] *= a;
    }
}

void lerp_avx2(double* target, const double* online, double tau, std::size_t n) {
    const double keep = 1.0 - tau;
    const __m256d vtau = _mm256_set1_pd(tau);
    const __m256d vkeep = _mm256_set1_pd(keep);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_mul_pd(vkeep, _mm256_loadu_pd(target + i));
        const __m256d o = _mm256_mul_pd(vtau, _mm256_loadu_pd(online + i));
        _mm256_storeu_pd(target + i, _mm256_add_pd(o, t));
    }
    for (; i < n; ++i) {
        target[i] = tau * online[i] + keep * target[i];
    }
}

void gemv_avx2(const double* w, std::size_t rows, std::size_t cols,
               const double* x, const double* bias, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        y[r] = (bias ? bias[r] : 0.0) + dot_avx2(row, x, cols);
    }
}

void gemv_t_avx2(const double* w, std::size_t rows, std::size_t cols,
                 const double* dy, double* dx) {
    std::memset(dx, 0, cols * sizeof(double));
    for (std::size_t r = 0; r < rows; ++r) {
        axpy_avx2(dy[r], w + r * cols, dx, cols);
    }
}

void ger_avx2(double* w, std::size_t rows, std::size_t cols,
              const double* dy, const double* x, double alpha) {
    for (std::size_t r = 0; r < rows; ++r) {
        axpy_avx2(alpha * dy[r], x, w + r * cols, cols);
    }
}

constexpr Ops kAvx2Ops = {
    "avx2", dot_avx2, axpy_avx2, scal_avx2, lerp_avx2, gemv_avx2, gemv_t_avx2, ger_avx2,
};

}  // namespace

const Ops* avx2_ops() {
    return __builtin_cpu_supports("avx2") ? &kAvx2Ops : nullptr;
}

}  // namespace fedcw::kernels

#else

namespace fedcw::kernels {
const Ops* avx2_ops() {
    return nullptr;
}
}  // namespace fedcw::kernels

#endif
