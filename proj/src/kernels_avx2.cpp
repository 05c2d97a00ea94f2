#include "pnp/kernels.hpp"

// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here may be called unless cpuid reports both
// (kernels_dispatch.cpp guards that).

#if defined(PNP_HAVE_AVX2_TU)

#include <immintrin.h>

namespace pnp::kernels::avx2 {

namespace {

// Horizontal sum of a 4-lane double register.
inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

} // namespace

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_shift(const double* x, double a, double b, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vb));
    }
    for (; i < n; ++i) out[i] = a * x[i] + b;
}

void add_scaled(const double* x, double a, const double* u, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(u + i), _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = x[i] + a * u[i];
}

void add_scaled2(const double* x, double a, const double* u, double b, const double* v,
                 double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(u + i), _mm256_loadu_pd(x + i));
        r = _mm256_fmadd_pd(vb, _mm256_loadu_pd(v + i), r);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = x[i] + a * u[i] + b * v[i];
}

void clamp(const double* x, double lo, double hi, double* out, std::size_t n) {
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        v = _mm256_min_pd(_mm256_max_pd(v, vlo), vhi);
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i) {
        double v = x[i];
        if (v < lo) v = lo;
        if (v > hi) v = hi;
        out[i] = v;
    }
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i,
                         _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] - y[i];
}

// Reductions run four independent accumulators to break the FMA dependency
// chain; the lane order differs from scalar, hence the relaxed equivalence
// tolerance in the tests.
double dot(const double* x, const double* y, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), a3);
    }
    for (; i + 4 <= n; i += 4) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    }
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
        a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
    }
    for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq(const double* x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d v0 = _mm256_loadu_pd(x + i);
        __m256d v1 = _mm256_loadu_pd(x + i + 4);
        a0 = _mm256_fmadd_pd(v0, v0, a0);
        a1 = _mm256_fmadd_pd(v1, v1, a1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        a0 = _mm256_fmadd_pd(v, v, a0);
    }
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void welford_update(double* mean, double* m2, const double* x, double inv_n,
                    std::size_t n) {
    const __m256d vinv = _mm256_set1_pd(inv_n);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vm = _mm256_loadu_pd(mean + i);
        const __m256d d = _mm256_sub_pd(vx, vm);
        const __m256d vm2new = _mm256_fmadd_pd(d, vinv, vm);
        _mm256_storeu_pd(mean + i, vm2new);
        const __m256d d2 = _mm256_sub_pd(vx, vm2new);
        __m256d acc = _mm256_loadu_pd(m2 + i);
        acc = _mm256_fmadd_pd(d, d2, acc);
        _mm256_storeu_pd(m2 + i, acc);
    }
    for (; i < n; ++i) {
        const double d = x[i] - mean[i];
        mean[i] += d * inv_n;
        m2[i] += d * (x[i] - mean[i]);
    }
}

// extern: const objects default to internal linkage, but the dispatcher in
// another translation unit links against this table by name.
extern const KernelTable kTable;
const KernelTable kTable = {
    &axpy, &scale_shift, &add_scaled, &add_scaled2, &clamp,
    &sub,  &dot,         &sum,        &sumsq,       &welford_update,
};

} // namespace pnp::kernels::avx2

#endif // PNP_HAVE_AVX2_TU
