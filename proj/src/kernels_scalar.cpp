#include "pnp/kernels.hpp"

// Scalar reference kernels. These are the semantic ground truth the SIMD
// variants are tested against, so keep them boring: one loop, no tricks.

namespace pnp::kernels::scalar {

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_shift(const double* x, double a, double b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b;
}

void add_scaled(const double* x, double a, const double* u, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * u[i];
}

void add_scaled2(const double* x, double a, const double* u, double b, const double* v,
                 double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * u[i] + b * v[i];
}

void clamp(const double* x, double lo, double hi, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i];
        if (v < lo) v = lo;
        if (v > hi) v = hi;
        out[i] = v;
    }
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void welford_update(double* mean, double* m2, const double* x, double inv_n,
                    std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
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

} // namespace pnp::kernels::scalar
