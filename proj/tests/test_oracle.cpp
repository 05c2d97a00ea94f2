#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "pnp/errors.hpp"
#include "pnp/oracle.hpp"
#include "pnp/ops.hpp"

using namespace pnp;

namespace {

double gauss_pdf(double x, double mean, double var) {
    return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) /
           std::sqrt(2.0 * std::numbers::pi * var);
}

GridDensity gaussian_grid(double mean, double var, double lo, double hi,
                          std::size_t n) {
    GridDensity g = GridDensity::function_1d(
        lo, hi, n, [=](double x) { return gauss_pdf(x, mean, var); });
    g.normalize();
    return g;
}

} // namespace

TEST_CASE("grid: quadrature, normalization and padding guard") {
    GridDensity g = GridDensity::function_1d(
        -10.0, 10.0, 4001, [](double x) { return gauss_pdf(x, 0.0, 0.25); });
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_FALSE(g.normalized());
    g.normalize();
    CHECK(g.normalized());
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.step(0) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK_NOTHROW(g.require_padding(2.0));

    // A standard normal truncated at +-2 has visible boundary mass.
    GridDensity tight = GridDensity::function_1d(
        -2.0, 2.0, 201, [](double x) { return gauss_pdf(x, 0.0, 1.0); });
    CHECK_THROWS_AS(tight.require_padding(0.5), SupportError);

    CHECK_THROWS_AS(GridDensity::function_1d(1.0, 0.0, 10, [](double) { return 1.0; }),
                    ConfigError);
    CHECK_THROWS_AS(GridDensity::function_1d(0.0, 1.0, 1, [](double) { return 1.0; }),
                    ConfigError);
    CHECK_THROWS_AS(
        GridDensity::function_1d(0.0, 1.0, 8, [](double) { return -1.0; }),
        ConfigError);
}

TEST_CASE("grid: save and load round-trip exactly") {
    GridDensity g = gaussian_grid(0.3, 0.5, -8.0, 8.0, 257);
    const auto base = std::filesystem::temp_directory_path() / "pnp_grid_test";
    g.save(base.string());

    const GridDensity back = GridDensity::load(base.string());
    CHECK(back.dim() == 1);
    CHECK(back.points(0) == 257);
    CHECK(back.low(0) == -8.0);
    CHECK(back.high(0) == 8.0);
    CHECK(back.normalized() == g.normalized());
    CHECK(back.values() == g.values());

    std::filesystem::remove(base);
    std::filesystem::remove(base.string() + ".json");
    CHECK_THROWS_AS(GridDensity::load(base.string()), TransportError);
}

TEST_CASE("grid: smoothing a gaussian adds the variances") {
    const GridDensity prior = gaussian_grid(0.0, 0.25, -12.0, 12.0, 4097);
    const GridDensity sm = grid_smoothed_prior(prior, 0.2);

    CHECK(sm.mass() == doctest::Approx(1.0).epsilon(1e-6));
    double worst = 0.0;
    for (std::size_t i = 0; i < sm.size(); ++i) {
        const double want = gauss_pdf(sm.coord(0, i), 0.0, 0.45);
        worst = std::max(worst, std::abs(sm.value(i) - want));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("grid: smoothed log density closed form and tail guard") {
    const GridDensity prior = gaussian_grid(0.0, 0.25, -12.0, 12.0, 4097);
    const double probe = 0.3;
    const double got = smoothed_log_density(prior, 0.2, {&probe, 1});
    const double want = std::log(gauss_pdf(0.3, 0.0, 0.45));
    CHECK(got == doctest::Approx(want).epsilon(1e-8));

    const double far = 400.0;
    CHECK_THROWS_AS(smoothed_log_density(prior, 0.2, {&far, 1}), NumericError);
}

TEST_CASE("grid: denoising posterior statistics match the conjugate forms") {
    const double s2 = 0.09, eps = 0.05, mu = 0.2;
    const GridDensity prior = gaussian_grid(mu, s2, -12.0, 12.0, 8193);

    const std::vector<double> probes = {-0.5, 0.2, 1.0};
    const auto means = grid_mmse_denoiser(prior, eps, probes);
    const auto vars = grid_denoising_posterior_variance(prior, eps, probes);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double want_mean = (s2 * probes[i] + eps * mu) / (s2 + eps);
        const double want_var = s2 * eps / (s2 + eps);
        CHECK(means[i] == doctest::Approx(want_mean).epsilon(1e-7));
        CHECK(vars[i] == doctest::Approx(want_var).epsilon(1e-6));
    }
}

TEST_CASE("grid: score identity holds for the gaussian prior") {
    const GridDensity prior = gaussian_grid(0.2, 0.09, -12.0, 12.0, 8193);
    const std::vector<double> probes = {-1.0, -0.3, 0.0, 0.2, 0.7, 1.0};
    const double res = tweedie_residual(prior, 0.05, probes, 1e-4);
    CHECK(res < 1e-7);

    CHECK_THROWS_AS(tweedie_residual(prior, 0.05, probes, 0.0), ConfigError);
    CHECK_THROWS_AS(tweedie_residual(prior, 0.05, probes, 0.05), ConfigError);
}

TEST_CASE("grid: posterior reweighting matches the conjugate gaussian") {
    const GridDensity prior = gaussian_grid(0.0, 1.0, -10.0, 10.0, 4097);
    const auto log_lik = [](std::span<const double> x) {
        return -(x[0] - 0.8) * (x[0] - 0.8) / (2.0 * 0.25);
    };
    const GridDensity post = grid_posterior(prior, log_lik);
    // Precision 1 + 4, data weight 4: N(0.64, 0.2).
    const GridDensity want = gaussian_grid(0.64, 0.2, -10.0, 10.0, 4097);
    CHECK(tv_distance(post, want) < 1e-8);

    const auto dead = [](std::span<const double>) {
        return -std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_AS(grid_posterior(prior, dead), NumericError);
}

TEST_CASE("grid: tv distance basics") {
    const GridDensity a = gaussian_grid(-5.0, 0.01, -10.0, 10.0, 4001);
    const GridDensity b = gaussian_grid(5.0, 0.01, -10.0, 10.0, 4001);
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(a, b) == doctest::Approx(1.0).epsilon(1e-6));

    const GridDensity coarser = gaussian_grid(-5.0, 0.01, -10.0, 10.0, 2001);
    CHECK_THROWS_AS(tv_distance(a, coarser), DimensionError);
}

TEST_CASE("grid: inverse-cdf samples agree with their density") {
    const GridDensity g = gaussian_grid(0.0, 1.0, -8.0, 8.0, 4097);
    const auto samples = sample_from_grid(g, 20000, 99);
    CHECK(samples.size() == 20000);
    CHECK(sample_from_grid(g, 20000, 99) == samples); // seeded, reproducible

    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= 20000.0;
    CHECK(std::abs(mean) < 0.03);

    bool underpowered = true;
    const double tv = histogram_tv(samples, g, 20, &underpowered);
    CHECK_FALSE(underpowered);
    CHECK(tv < 0.05);

    const std::vector<double> few(samples.begin(), samples.begin() + 150);
    histogram_tv(few, g, 20, &underpowered);
    CHECK(underpowered); // 150 < 10 * 20
}

TEST_CASE("grid: empirical 2d tv on identical and disjoint clouds") {
    std::vector<double> ax, ay, bx, by;
    for (int i = 0; i < 500; ++i) {
        const double t = static_cast<double>(i) / 500.0;
        ax.push_back(-3.0 + t);
        ay.push_back(-3.0 + 0.5 * t);
        bx.push_back(3.0 - t);
        by.push_back(3.0 - 0.5 * t);
    }
    CHECK(empirical_tv_2d(ax, ay, ax, ay, -6.0, 6.0, 12) == 0.0);
    CHECK(empirical_tv_2d(ax, ay, bx, by, -6.0, 6.0, 12) == doctest::Approx(1.0));
    CHECK_THROWS_AS(empirical_tv_2d(ax, ay, bx, std::vector<double>(3, 0.0), -6.0,
                                    6.0, 12),
                    DimensionError);
}

TEST_CASE("grid: posterior smoothing error shrinks with eps") {
    // The support check needs 6*sqrt(0.4) of clearance beyond where the
    // density falls under 1e-12 of its peak (|x| ~ 7.4), hence the wide box.
    const GridDensity prior = gaussian_grid(0.0, 1.0, -14.0, 14.0, 8193);
    const auto log_lik = [](std::span<const double> x) {
        return -(x[0] - 0.5) * (x[0] - 0.5) / (2.0 * 0.25);
    };
    const std::vector<double> eps_list = {0.4, 0.2, 0.1};
    const auto curve = epsilon_convergence_curve(prior, log_lik, eps_list);
    REQUIRE(curve.size() == 4);
    CHECK(curve[3].first == 0.0);
    CHECK(curve[3].second == 0.0);
    CHECK(curve[0].second > curve[1].second);
    CHECK(curve[1].second > curve[2].second);
    CHECK(curve[2].second > 0.0);

    const std::vector<double> bad = {0.1, 0.2};
    CHECK_THROWS_AS(epsilon_convergence_curve(prior, log_lik, bad), ConfigError);
}

TEST_CASE("oracle: dense conjugate posterior for the identity operator") {
    const auto op = LinearOperator::identity(2, 2);
    const std::vector<double> y = {0.2, -0.1, 0.5, 0.0};
    const std::vector<double> mu(4, 0.1);
    const double sigma = 0.3, s2 = 0.8, eps = 0.2;

    const GaussianPosterior post = gaussian_posterior(op, y, sigma, mu, s2, eps);
    const double prec = 1.0 / (sigma * sigma) + 1.0 / (s2 + eps);
    const auto vars = post.variance_diag();
    for (std::size_t i = 0; i < 4; ++i) {
        const double want_mean =
            (y[i] / (sigma * sigma) + mu[i] / (s2 + eps)) / prec;
        CHECK(post.mean()[i] == doctest::Approx(want_mean).epsilon(1e-12));
        CHECK(vars[i] == doctest::Approx(1.0 / prec).epsilon(1e-12));
    }
}

TEST_CASE("oracle: dense posterior agrees with the 1d grid pipeline") {
    const auto op = LinearOperator::identity(1, 1);
    const std::vector<double> y = {0.3};
    const std::vector<double> mu = {0.1};
    const double sigma = 0.6, s2 = 0.5, eps = 0.25;
    const GaussianPosterior post = gaussian_posterior(op, y, sigma, mu, s2, eps);

    // Same model through the grid: smooth the prior by eps, then condition on
    // the observation, which for a scalar identity is one denoising step with
    // noise variance sigma^2.
    const GridDensity prior = gaussian_grid(0.1, 0.5, -14.0, 14.0, 8193);
    const GridDensity sm = grid_smoothed_prior(prior, eps);
    const double probe = 0.3;
    const double grid_mean = grid_mmse_point(sm, sigma * sigma, {&probe, 1})[0];
    const double grid_var = grid_denoising_variance_point(sm, sigma * sigma, {&probe, 1});

    CHECK(post.mean()[0] == doctest::Approx(grid_mean).epsilon(1e-6));
    CHECK(post.variance_diag()[0] == doctest::Approx(grid_var).epsilon(1e-5));
}

TEST_CASE("oracle: 2d grids carry product densities") {
    GridDensity g = GridDensity::function_2d(
        -6.0, 6.0, 257, -4.0, 4.0, 129, [](double x0, double x1) {
            return gauss_pdf(x0, 0.5, 0.3) * gauss_pdf(x1, -0.2, 0.2);
        });
    CHECK(g.dim() == 2);
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-8));
    g.normalize();

    const std::vector<double> probe = {0.4, -0.1};
    const auto mmse = grid_mmse_point(g, 0.1, probe);
    // Coordinatewise conjugate shrinkage of the probe toward each mean.
    const double want0 = (0.3 * 0.4 + 0.1 * 0.5) / 0.4;
    const double want1 = (0.2 * -0.1 + 0.1 * -0.2) / 0.3;
    CHECK(mmse[0] == doctest::Approx(want0).epsilon(1e-5));
    CHECK(mmse[1] == doctest::Approx(want1).epsilon(1e-5));
}
