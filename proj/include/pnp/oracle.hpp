#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pnp/ops.hpp"

namespace pnp {

// Tabulated density on a uniform 1D or 2D grid (endpoints included). The
// ground-truth side of the verification suites: priors, smoothed priors and
// posteriors all live here, integrated with trapezoid weights.
class GridDensity {
public:
    static GridDensity function_1d(double lo, double hi, std::size_t n,
                                   const std::function<double(double)>& f);
    static GridDensity function_2d(double lo0, double hi0, std::size_t n0,
                                   double lo1, double hi1, std::size_t n1,
                                   const std::function<double(double, double)>& f);

    int dim() const { return dim_; }
    std::size_t points(int axis) const { return n_[check_axis(axis)]; }
    double low(int axis) const { return lo_[check_axis(axis)]; }
    double high(int axis) const { return hi_[check_axis(axis)]; }
    double step(int axis) const;
    double coord(int axis, std::size_t i) const;

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double value(std::size_t flat) const { return values_[flat]; }
    std::size_t size() const { return values_.size(); }
    bool normalized() const { return normalized_; }

    // Trapezoid quadrature weight of a grid node times the cell volume.
    double quad_weight(std::size_t flat) const;
    double mass() const;
    void normalize(); // zero mass is a numeric error
    double max_value() const;

    // Requires every node within `pad` of the support boundary to carry less
    // than 1e-12 of the peak; the smoothing blur needs this margin.
    void require_padding(double pad) const;

    // Raw-f64 payload plus a small JSON sidecar (<path>.json).
    void save(const std::string& path) const;
    static GridDensity load(const std::string& path);

private:
    int check_axis(int axis) const;

    int dim_ = 1;
    double lo_[2] = {0.0, 0.0};
    double hi_[2] = {0.0, 0.0};
    std::size_t n_[2] = {0, 1};
    std::vector<double> values_; // row-major, axis 0 slowest
    bool normalized_ = false;
};

// Density convolved with a Gaussian of variance eps (the noisy-prior
// smoothing). Separable FFT convolution; mass is preserved within 1e-6
// because the support check guarantees negligible truncation.
GridDensity grid_smoothed_prior(const GridDensity& p, double eps);

// Pointwise evaluations of the smoothed prior and the induced denoising
// posterior at arbitrary (off-grid) points, all in log space with
// max-subtraction. Points carry dim() coordinates.
double smoothed_log_density(const GridDensity& p, double eps, std::span<const double> x);
std::array<double, 2> grid_mmse_point(const GridDensity& p, double eps,
                                      std::span<const double> x);
double grid_denoising_variance_point(const GridDensity& p, double eps,
                                     std::span<const double> x);

// 1D conveniences over a probe vector.
std::vector<double> grid_mmse_denoiser(const GridDensity& p, double eps,
                                       std::span<const double> xs);
std::vector<double> grid_denoising_posterior_variance(const GridDensity& p, double eps,
                                                      std::span<const double> xs);

// max over probes of |eps * d/dx log p_eps(x) - (D(x) - x)|, the score
// identity residual; the derivative is a central difference with spacing h.
double tweedie_residual(const GridDensity& p, double eps, std::span<const double> xs,
                        double h);

// prior(x) * exp(log_lik(x)) renormalized. log_lik sees dim() coordinates.
GridDensity grid_posterior(const GridDensity& prior,
                           const std::function<double(std::span<const double>)>& log_lik);

// Half the integrated absolute difference; grids must share their geometry.
double tv_distance(const GridDensity& a, const GridDensity& b);

// Half the L1 gap between the sample histogram and the density's bin masses
// over `bins` equal cells spanning the support; samples outside contribute
// their full weight. Sets *underpowered when fewer than 10*bins samples.
double histogram_tv(std::span<const double> samples, const GridDensity& density,
                    std::size_t bins, bool* underpowered = nullptr);

// TV between two empirical 2D laws on a shared [lo,hi]^2 grid of bins^2 cells.
double empirical_tv_2d(std::span<const double> ax, std::span<const double> ay,
                       std::span<const double> bx, std::span<const double> by,
                       double lo, double hi, std::size_t bins);

// Inverse-CDF draws from a 1D grid density (piecewise-linear CDF).
std::vector<double> sample_from_grid(const GridDensity& density, std::size_t count,
                                     std::uint64_t seed);

// TV(posterior with eps-smoothed prior, posterior with raw prior) for each
// eps in decreasing order, with the limit point (0, 0) appended.
std::vector<std::pair<double, double>> epsilon_convergence_curve(
    const GridDensity& prior,
    const std::function<double(std::span<const double>)>& log_lik,
    std::span<const double> eps_list);

// Exact posterior for a linear-Gaussian model with an isotropic Gaussian
// prior smoothed by eps: precision = A^T A / sigma^2 + Id/(s^2 + eps).
// Stored as mean plus the lower Cholesky factor of the precision.
class GaussianPosterior {
public:
    GaussianPosterior(std::vector<double> mean, std::vector<double> chol_lower);

    std::size_t dim() const { return mean_.size(); }
    const std::vector<double>& mean() const { return mean_; }
    // Marginal variances: diag of the precision inverse.
    std::vector<double> variance_diag() const;

private:
    std::vector<double> mean_;
    std::vector<double> chol_; // d x d row-major, lower triangle
};

GaussianPosterior gaussian_posterior(const LinearOperator& a, std::span<const double> y,
                                     double sigma, std::span<const double> prior_mean,
                                     double prior_var, double eps);

} // namespace pnp
