#include "pnp/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "pnp/errors.hpp"

namespace pnp::kernels {

namespace scalar {
extern const KernelTable kTable;
}

#if defined(PNP_HAVE_AVX2_TU)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

bool avx2_available() {
#if defined(PNP_HAVE_AVX2_TU) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Backend pick_default() {
    if (const char* env = std::getenv("PNP_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::Avx2;
        // Unknown or unavailable request: fall through to autodetect.
    }
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend> g_backend{pick_default()};

} // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

std::string backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available())
        throw ConfigError("kernel backend avx2 not available on this CPU");
    g_backend.store(b, std::memory_order_relaxed);
}

const KernelTable& table(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return scalar::kTable;
    case Backend::Avx2:
#if defined(PNP_HAVE_AVX2_TU)
        if (avx2_available()) return avx2::kTable;
#endif
        throw ConfigError("kernel backend avx2 not available on this CPU");
    }
    throw ConfigError("unknown kernel backend");
}

namespace {
inline const KernelTable& active() { return table(active_backend()); }

inline void check_same(std::size_t a, std::size_t b) {
    if (a != b) throw DimensionError("kernel span sizes differ");
}
} // namespace

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_same(x.size(), y.size());
    active().axpy(a, x.data(), y.data(), x.size());
}

void scale_shift(std::span<const double> x, double a, double b, std::span<double> out) {
    check_same(x.size(), out.size());
    active().scale_shift(x.data(), a, b, out.data(), x.size());
}

void add_scaled(std::span<const double> x, double a, std::span<const double> u,
                std::span<double> out) {
    check_same(x.size(), u.size());
    check_same(x.size(), out.size());
    active().add_scaled(x.data(), a, u.data(), out.data(), x.size());
}

void add_scaled2(std::span<const double> x, double a, std::span<const double> u,
                 double b, std::span<const double> v, std::span<double> out) {
    check_same(x.size(), u.size());
    check_same(x.size(), v.size());
    check_same(x.size(), out.size());
    active().add_scaled2(x.data(), a, u.data(), b, v.data(), out.data(), x.size());
}

void clamp(std::span<const double> x, double lo, double hi, std::span<double> out) {
    check_same(x.size(), out.size());
    active().clamp(x.data(), lo, hi, out.data(), x.size());
}

void sub(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    check_same(x.size(), y.size());
    check_same(x.size(), out.size());
    active().sub(x.data(), y.data(), out.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
    check_same(x.size(), y.size());
    return active().dot(x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

double sumsq(std::span<const double> x) { return active().sumsq(x.data(), x.size()); }

void welford_update(std::span<double> mean, std::span<double> m2,
                    std::span<const double> x, double inv_n) {
    check_same(mean.size(), m2.size());
    check_same(mean.size(), x.size());
    active().welford_update(mean.data(), m2.data(), x.data(), inv_n, x.size());
}

} // namespace pnp::kernels
