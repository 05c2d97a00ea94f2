#pragma once

// ============================================================================
// Vectorized primitive kernels
// ============================================================================
//
// Every hot loop in the sampler funnels through these primitives: the chain
// update is add_scaled2 + clamp, the likelihood gradient is convolution taps
// expressed as axpy, the analytic denoisers are scale_shift, and the moment
// accumulators are welford_update. Each primitive has a scalar reference
// implementation and (on x86-64) an AVX2+FMA variant. The active backend is
// chosen once at runtime from cpuid; tests pin both backends and compare.
//
// Floating-point contract: the AVX2 variants may contract a*b+c into one FMA
// and reassociate reduction sums, so results can differ from scalar by normal
// rounding slack (a few ulp elementwise, ~1e-14 relative on reductions).
// Within one backend results are deterministic.

#include <cstddef>
#include <span>
#include <string>

namespace pnp::kernels {

enum class Backend { Scalar, Avx2 };

// Backend selected for this process (cpuid + PNP_KERNELS env override).
Backend active_backend();
std::string backend_name(Backend b);

// Force a backend (tests, benchmarking). Throws ConfigError if the requested
// backend is not runnable on this CPU.
void set_backend(Backend b);

// y += a*x
void axpy(double a, std::span<const double> x, std::span<double> y);

// out = a*x + b
void scale_shift(std::span<const double> x, double a, double b, std::span<double> out);

// out = x + a*u
void add_scaled(std::span<const double> x, double a, std::span<const double> u,
                std::span<double> out);

// out = x + a*u + b*v   (one chain step: state + delta*drift + sqrt(2 delta)*z)
void add_scaled2(std::span<const double> x, double a, std::span<const double> u,
                 double b, std::span<const double> v, std::span<double> out);

// out = min(max(x, lo), hi)
void clamp(std::span<const double> x, double lo, double hi, std::span<double> out);

// out = x - y
void sub(std::span<const double> x, std::span<const double> y, std::span<double> out);

double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
double sumsq(std::span<const double> x);

// One Welford step over a whole field. inv_n = 1/n where n is the count
// AFTER including x. For every i:
//   d        = x[i] - mean[i]
//   mean[i] += d * inv_n
//   m2[i]   += d * (x[i] - mean[i])
void welford_update(std::span<double> mean, std::span<double> m2,
                    std::span<const double> x, double inv_n);

// ----------------------------------------------------------------------------
// Raw per-backend entry points (pointer based) used by the dispatch table and
// the equivalence tests.
// ----------------------------------------------------------------------------
struct KernelTable {
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale_shift)(const double*, double, double, double*, std::size_t);
    void (*add_scaled)(const double*, double, const double*, double*, std::size_t);
    void (*add_scaled2)(const double*, double, const double*, double, const double*,
                        double*, std::size_t);
    void (*clamp)(const double*, double, double, double*, std::size_t);
    void (*sub)(const double*, const double*, double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sumsq)(const double*, std::size_t);
    void (*welford_update)(double*, double*, const double*, double, std::size_t);
};

const KernelTable& table(Backend b);   // throws ConfigError if unavailable
bool avx2_available();

} // namespace pnp::kernels
