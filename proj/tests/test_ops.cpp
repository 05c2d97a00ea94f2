#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "pnp/errors.hpp"
#include "pnp/field.hpp"
#include "pnp/ops.hpp"
#include "pnp/rng.hpp"

using namespace pnp;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    GaussianStream stream(seed);
    stream.fill(v);
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// <A x, y> == <x, A^T y> for random x, y; the decisive test that apply and
// adjoint implement the same matrix.
void check_adjoint_identity(const LinearOperator& op, std::uint64_t seed) {
    const std::vector<double> x = random_vec(op.input_size(), seed);
    const std::vector<double> y = random_vec(op.output_size(), seed + 1);
    std::vector<double> ax(op.output_size()), aty(op.input_size());
    op.apply(x, ax);
    op.adjoint(y, aty);
    CHECK(dot(ax, y) == doctest::Approx(dot(x, aty)).epsilon(1e-12));
}

} // namespace

TEST_CASE("ops: identity passes vectors through both ways") {
    const auto op = LinearOperator::identity(3, 4);
    CHECK(op.input_size() == 12);
    CHECK(op.output_size() == 12);

    const std::vector<double> x = random_vec(12, 5);
    std::vector<double> out(12);
    op.apply(x, out);
    CHECK(out == x);
    op.adjoint(x, out);
    CHECK(out == x);
}

TEST_CASE("ops: box blur kernel is normalized and fixes constants") {
    const auto op = LinearOperator::box_blur(3, 8, 8);
    double mass = 0.0;
    for (double v : op.kernel().values()) mass += v;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));

    // Periodic boundaries make constant images exact fixed points.
    const std::vector<double> ones(64, 1.0);
    std::vector<double> out(64);
    op.apply(ones, out);
    for (double v : out) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
    op.adjoint(ones, out);
    for (double v : out) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("ops: blur matches a direct periodic convolution sum") {
    // Non-separable asymmetric kernel so the generic tap loop is exercised.
    ImageField kernel(3, 3, {0.05, 0.10, 0.05,
                             0.10, 0.30, 0.15,
                             0.05, 0.15, 0.05});
    const auto op = LinearOperator::periodic_convolution(kernel, 5, 7);
    const std::vector<double> x = random_vec(35, 21);
    std::vector<double> got(35);
    op.apply(x, got);

    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 7; ++c) {
            double want = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = 0; j < 3; ++j) {
                    // Tap (i, j) reads the pixel at offset (i-1, j-1), wrapped.
                    const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(i) - 1;
                    const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(j) - 1;
                    const std::size_t rr =
                        static_cast<std::size_t>((static_cast<std::ptrdiff_t>(r) + dy + 5) % 5);
                    const std::size_t cc =
                        static_cast<std::size_t>((static_cast<std::ptrdiff_t>(c) + dx + 7) % 7);
                    want += kernel.at(i, j) * x[rr * 7 + cc];
                }
            }
            CHECK(got[r * 7 + c] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("ops: apply and adjoint agree for every operator kind") {
    check_adjoint_identity(LinearOperator::identity(4, 6), 31);
    check_adjoint_identity(LinearOperator::box_blur(5, 9, 9), 32);
    ImageField kernel(3, 3, {0.05, 0.10, 0.05,
                             0.10, 0.30, 0.15,
                             0.05, 0.15, 0.05});
    check_adjoint_identity(LinearOperator::periodic_convolution(kernel, 6, 8), 33);
    check_adjoint_identity(LinearOperator::mask(4, 4, {0, 3, 5, 9, 15}), 34);
}

TEST_CASE("ops: blur construction rejects bad kernels") {
    CHECK_THROWS_AS(LinearOperator::box_blur(4, 8, 8), ConfigError);
    CHECK_THROWS_AS(LinearOperator::box_blur(0, 8, 8), ConfigError);
    CHECK_THROWS_AS(LinearOperator::box_blur(9, 8, 8), ConfigError);
    CHECK_THROWS_AS(
        LinearOperator::periodic_convolution(ImageField(2, 2, 0.5), 8, 8),
        ConfigError); // does not sum to 1
    CHECK_THROWS_AS(
        LinearOperator::periodic_convolution(ImageField(1, 2, {1.5, -0.5}), 8, 8),
        ConfigError); // negative entry
}

TEST_CASE("ops: mask gathers kept pixels and scatters on adjoint") {
    const auto op = LinearOperator::mask(2, 3, {1, 4});
    CHECK(op.output_size() == 2);

    const std::vector<double> x = {10, 11, 12, 13, 14, 15};
    std::vector<double> y(2);
    op.apply(x, y);
    CHECK(y[0] == 11.0);
    CHECK(y[1] == 14.0);

    std::vector<double> back(6, 99.0);
    op.adjoint(y, back);
    CHECK(back == std::vector<double>{0, 11, 0, 0, 14, 0});

    CHECK(op.hidden_indices() == std::vector<std::size_t>{0, 2, 3, 5});

    CHECK_THROWS_AS(LinearOperator::mask(2, 3, {}), ConfigError);
    CHECK_THROWS_AS(LinearOperator::mask(2, 3, {4, 1}), ConfigError);
    CHECK_THROWS_AS(LinearOperator::mask(2, 3, {1, 1}), ConfigError);
    CHECK_THROWS_AS(LinearOperator::mask(2, 3, {1, 6}), ConfigError);
    CHECK_THROWS_AS(LinearOperator::identity(2, 3).kept_indices(), ConfigError);
}

TEST_CASE("ops: random mask keeps the rounded fraction, reproducibly") {
    const auto op = LinearOperator::random_mask(10, 10, 0.8, 123);
    const auto& kept = op.kept_indices();
    CHECK(kept.size() == 20); // round(0.2 * 100)
    for (std::size_t i = 1; i < kept.size(); ++i) CHECK(kept[i - 1] < kept[i]);
    CHECK(kept.back() < 100);
    CHECK(op.hidden_indices().size() == 80);

    const auto again = LinearOperator::random_mask(10, 10, 0.8, 123);
    CHECK(again.kept_indices() == kept);
    const auto other = LinearOperator::random_mask(10, 10, 0.8, 124);
    CHECK(other.kept_indices() != kept);

    CHECK_THROWS_AS(LinearOperator::random_mask(10, 10, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(LinearOperator::random_mask(10, 10, -0.1, 1), ConfigError);
}

TEST_CASE("ops: power iteration recovers known operator norms") {
    const auto id_norm = operator_norm_sq(LinearOperator::identity(4, 4));
    CHECK(id_norm.converged);
    CHECK(id_norm.value == doctest::Approx(1.0).epsilon(1e-10));

    // Averaging kernels have top singular value 1 (the constant vector).
    const auto blur_norm = operator_norm_sq(LinearOperator::box_blur(3, 12, 12));
    CHECK(blur_norm.converged);
    CHECK(blur_norm.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(blur_norm.value <= 1.0 + 1e-9);

    // Masks are coordinate selections: A^T A is a 0/1 diagonal.
    const auto mask_norm =
        operator_norm_sq(LinearOperator::random_mask(8, 8, 0.5, 7));
    CHECK(mask_norm.converged);
    CHECK(mask_norm.value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("likelihood: gradient vanishes on a perfect fit") {
    const auto op = LinearOperator::box_blur(3, 4, 4);
    const std::vector<double> x = random_vec(16, 40);
    std::vector<double> y(16);
    op.apply(x, y);

    const GaussianLikelihood lik(op, y, 0.2);
    std::vector<double> g(16, 1.0);
    lik.grad_log(x, g);
    for (double v : g) CHECK(std::abs(v) < 1e-12);
    CHECK(lik.log_density(x) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("likelihood: gradient matches finite differences of log density") {
    const auto op = LinearOperator::box_blur(3, 4, 4);
    const std::vector<double> y = random_vec(16, 50);
    const GaussianLikelihood lik(op, y, 0.35);

    std::vector<double> x = random_vec(16, 51);
    std::vector<double> g(16);
    lik.grad_log(x, g);

    const double h = 1e-6;
    for (std::size_t i = 0; i < 16; ++i) {
        std::vector<double> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (lik.log_density(xp) - lik.log_density(xm)) / (2.0 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("likelihood: analytic constants bound the empirical probes") {
    const double sigma = 0.25;

    SUBCASE("identity is strongly concave with m = 1/sigma^2") {
        const auto op = LinearOperator::identity(3, 3);
        const GaussianLikelihood lik(op, std::vector<double>(9, 0.1), sigma);
        CHECK(lik.lipschitz() == doctest::Approx(1.0 / (sigma * sigma)).epsilon(1e-9));
        CHECK(lik.one_sided_m() == doctest::Approx(1.0 / (sigma * sigma)).epsilon(1e-12));

        const double probe_l = gradient_lipschitz_probe(lik, 200, 60, -2.0, 2.0);
        CHECK(probe_l <= lik.lipschitz() * (1.0 + 1e-9));
        CHECK(probe_l > 0.9 * lik.lipschitz()); // identity attains its bound

        const double probe_m = one_sided_probe(lik, 200, 61, -2.0, 2.0);
        CHECK(probe_m <= -lik.one_sided_m() * (1.0 - 1e-9));
    }

    SUBCASE("blur has a null direction, so m = 0") {
        const auto op = LinearOperator::box_blur(3, 6, 6);
        const GaussianLikelihood lik(op, std::vector<double>(36, 0.0), sigma);
        CHECK(lik.one_sided_m() == 0.0);
        CHECK(lik.lipschitz() == doctest::Approx(1.0 / (sigma * sigma)).epsilon(1e-6));

        const double probe_l = gradient_lipschitz_probe(lik, 200, 62, -2.0, 2.0);
        CHECK(probe_l <= lik.lipschitz() * (1.0 + 1e-9));
        const double probe_m = one_sided_probe(lik, 200, 63, -2.0, 2.0);
        CHECK(probe_m <= 1e-12); // quadratic log density is concave
    }
}

TEST_CASE("likelihood: constructor validates inputs") {
    const auto op = LinearOperator::identity(2, 2);
    CHECK_THROWS_AS(GaussianLikelihood(op, std::vector<double>(4, 0.0), 0.0),
                    ConfigError);
    CHECK_THROWS_AS(GaussianLikelihood(op, std::vector<double>(3, 0.0), 0.5),
                    DimensionError);
    const GaussianLikelihood lik(op, std::vector<double>(4, 0.0), 0.5);
    std::vector<double> wrong(3);
    CHECK_THROWS_AS(lik.grad_log(std::vector<double>(4, 0.0), wrong), DimensionError);
}
