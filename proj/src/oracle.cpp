#include "pnp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <json.hpp>

#include "pnp/errors.hpp"
#include "pnp/fft.hpp"
#include "pnp/image_io.hpp"
#include "pnp/kernels.hpp"

namespace pnp {

namespace {

constexpr double kBoundaryFraction = 1e-12;
// exp() underflows around -745; refuse probes whose nearest support node is
// already deeper than this in the kernel exponent.
constexpr double kTailExponentLimit = -690.0;

} // namespace

int GridDensity::check_axis(int axis) const {
    if (axis < 0 || axis >= dim_) throw ConfigError("grid axis out of range");
    return axis;
}

double GridDensity::step(int axis) const {
    const int a = check_axis(axis);
    return (hi_[a] - lo_[a]) / static_cast<double>(n_[a] - 1);
}

double GridDensity::coord(int axis, std::size_t i) const {
    const int a = check_axis(axis);
    return lo_[a] + static_cast<double>(i) * step(a);
}

GridDensity GridDensity::function_1d(double lo, double hi, std::size_t n,
                                     const std::function<double(double)>& f) {
    if (!(hi > lo)) throw ConfigError("grid support must have hi > lo");
    if (n < 2) throw ConfigError("grid needs at least 2 points per axis");
    GridDensity g;
    g.dim_ = 1;
    g.lo_[0] = lo;
    g.hi_[0] = hi;
    g.n_[0] = n;
    g.n_[1] = 1;
    g.values_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = f(g.coord(0, i));
        if (!(v >= 0.0)) throw ConfigError("density values must be nonnegative and finite");
        g.values_[i] = v;
    }
    return g;
}

GridDensity GridDensity::function_2d(double lo0, double hi0, std::size_t n0,
                                     double lo1, double hi1, std::size_t n1,
                                     const std::function<double(double, double)>& f) {
    if (!(hi0 > lo0) || !(hi1 > lo1)) throw ConfigError("grid support must have hi > lo");
    if (n0 < 2 || n1 < 2) throw ConfigError("grid needs at least 2 points per axis");
    GridDensity g;
    g.dim_ = 2;
    g.lo_[0] = lo0;
    g.hi_[0] = hi0;
    g.n_[0] = n0;
    g.lo_[1] = lo1;
    g.hi_[1] = hi1;
    g.n_[1] = n1;
    g.values_.resize(n0 * n1);
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
            const double v = f(g.coord(0, i), g.coord(1, j));
            if (!(v >= 0.0))
                throw ConfigError("density values must be nonnegative and finite");
            g.values_[i * n1 + j] = v;
        }
    return g;
}

double GridDensity::quad_weight(std::size_t flat) const {
    if (dim_ == 1) {
        const double edge = (flat == 0 || flat == n_[0] - 1) ? 0.5 : 1.0;
        return edge * step(0);
    }
    const std::size_t i = flat / n_[1];
    const std::size_t j = flat % n_[1];
    const double wi = (i == 0 || i == n_[0] - 1) ? 0.5 : 1.0;
    const double wj = (j == 0 || j == n_[1] - 1) ? 0.5 : 1.0;
    return wi * wj * step(0) * step(1);
}

double GridDensity::mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * quad_weight(i);
    return m;
}

void GridDensity::normalize() {
    const double m = mass();
    if (!(m > 0.0) || !std::isfinite(m))
        throw NumericError("grid density has degenerate mass " + std::to_string(m));
    for (double& v : values_) v /= m;
    normalized_ = true;
}

double GridDensity::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

void GridDensity::require_padding(double pad) const {
    const double thresh = kBoundaryFraction * max_value();
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
        if (values_[flat] < thresh) continue;
        for (int a = 0; a < dim_; ++a) {
            const std::size_t idx = (a == 0 && dim_ == 2) ? flat / n_[1]
                                    : (dim_ == 2)         ? flat % n_[1]
                                                          : flat;
            const double c = coord(a, idx);
            if (c < lo_[a] + pad || c > hi_[a] - pad) {
                throw SupportError("grid support lacks the required padding of " +
                                   std::to_string(pad) + " around its mass");
            }
        }
    }
}

void GridDensity::save(const std::string& path) const {
    ImageField payload(n_[0], n_[1], values_);
    write_field_raw(payload, path);
    nlohmann::json meta;
    meta["dim"] = dim_;
    meta["lo"] = {lo_[0], lo_[1]};
    meta["hi"] = {hi_[0], hi_[1]};
    meta["n"] = {n_[0], n_[1]};
    meta["normalized"] = normalized_;
    std::ofstream out(path + ".json");
    if (!out) throw TransportError("cannot open " + path + ".json for writing");
    out << meta.dump(2) << "\n";
}

GridDensity GridDensity::load(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) throw TransportError("cannot open " + path + ".json");
    nlohmann::json meta;
    try {
        in >> meta;
    } catch (const std::exception& e) {
        throw TransportError("bad grid sidecar " + path + ".json: " + e.what());
    }
    GridDensity g;
    try {
        g.dim_ = meta.at("dim").get<int>();
        for (int a = 0; a < 2; ++a) {
            g.lo_[a] = meta.at("lo").at(a).get<double>();
            g.hi_[a] = meta.at("hi").at(a).get<double>();
            g.n_[a] = meta.at("n").at(a).get<std::size_t>();
        }
        g.normalized_ = meta.at("normalized").get<bool>();
    } catch (const std::exception& e) {
        throw TransportError("bad grid sidecar " + path + ".json: " + e.what());
    }
    if (g.dim_ < 1 || g.dim_ > 2) throw TransportError("grid sidecar: dim must be 1 or 2");
    const ImageField payload = read_field_raw(path);
    if (payload.height() != g.n_[0] || payload.width() != g.n_[1])
        throw TransportError("grid payload shape disagrees with sidecar");
    g.values_ = payload.values();
    return g;
}

namespace {

// Linear convolution of v (spacing h) with a unit-mass Gaussian of variance
// eps, truncated at 6 sigma. Zero-padded FFT; the caller has already checked
// that v's mass sits >= 6 sigma away from both ends.
std::vector<double> smooth_line(const std::vector<double>& v, double h, double eps) {
    const std::size_t n = v.size();
    const auto half = static_cast<std::size_t>(std::ceil(6.0 * std::sqrt(eps) / h));
    std::size_t len = 1;
    while (len < n + 2 * half + 1) len <<= 1;

    std::vector<std::complex<double>> a(len), k(len);
    for (std::size_t i = 0; i < n; ++i) a[i] = v[i];
    const double c = h / std::sqrt(2.0 * std::numbers::pi * eps);
    for (std::size_t t = 0; t <= half; ++t) {
        const double arg = static_cast<double>(t) * h;
        const double w = c * std::exp(-arg * arg / (2.0 * eps));
        k[t] += w;
        if (t > 0) k[len - t] += w;
    }
    fft(a, false);
    fft(k, false);
    for (std::size_t i = 0; i < len; ++i) a[i] *= k[i];
    fft(a, true);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(0.0, a[i].real());
    return out;
}

} // namespace

GridDensity grid_smoothed_prior(const GridDensity& p, double eps) {
    if (!(eps > 0.0)) throw ConfigError("smoothing eps must be positive");
    p.require_padding(6.0 * std::sqrt(eps));

    GridDensity out = p;
    if (p.dim() == 1) {
        out.values() = smooth_line(p.values(), p.step(0), eps);
        return out;
    }
    const std::size_t n0 = p.points(0), n1 = p.points(1);
    // Separable kernel: rows first, then columns through a strided copy.
    std::vector<double> line(n1);
    for (std::size_t i = 0; i < n0; ++i) {
        std::copy_n(out.values().begin() + static_cast<std::ptrdiff_t>(i * n1), n1,
                    line.begin());
        const std::vector<double> s = smooth_line(line, p.step(1), eps);
        std::copy(s.begin(), s.end(),
                  out.values().begin() + static_cast<std::ptrdiff_t>(i * n1));
    }
    std::vector<double> col(n0);
    for (std::size_t j = 0; j < n1; ++j) {
        for (std::size_t i = 0; i < n0; ++i) col[i] = out.values()[i * n1 + j];
        const std::vector<double> s = smooth_line(col, p.step(0), eps);
        for (std::size_t i = 0; i < n0; ++i) out.values()[i * n1 + j] = s[i];
    }
    return out;
}

namespace {

// Shared scan for the pointwise g_eps evaluations: visits every node with
// positive density, handing the kernel log-weight to a callback. Throws when
// the probe sits so far out that every kernel weight underflows.
template <typename Visit>
void scan_kernel(const GridDensity& p, double eps, std::span<const double> x,
                 double& max_log, Visit&& visit) {
    if (static_cast<int>(x.size()) != p.dim())
        throw DimensionError("probe point dimension does not match the grid");
    const std::size_t n1 = p.dim() == 2 ? p.points(1) : 1;
    max_log = -std::numeric_limits<double>::infinity();
    double best_exponent = -std::numeric_limits<double>::infinity();
    for (std::size_t flat = 0; flat < p.size(); ++flat) {
        const double v = p.value(flat);
        if (v <= 0.0) continue;
        double d2 = 0.0;
        if (p.dim() == 1) {
            const double dx = x[0] - p.coord(0, flat);
            d2 = dx * dx;
        } else {
            const double d0 = x[0] - p.coord(0, flat / n1);
            const double d1 = x[1] - p.coord(1, flat % n1);
            d2 = d0 * d0 + d1 * d1;
        }
        const double expo = -d2 / (2.0 * eps);
        best_exponent = std::max(best_exponent, expo);
        const double l = std::log(v * p.quad_weight(flat)) + expo;
        max_log = std::max(max_log, l);
        visit(flat, l);
    }
    if (best_exponent < kTailExponentLimit) {
        throw NumericError("tail underflow: probe point lies too far outside the grid support");
    }
    if (!std::isfinite(max_log)) {
        throw NumericError("grid density carries no positive mass");
    }
}

struct KernelMoments {
    double z = 0.0;              // sum of exp(l - max)
    double mean[2] = {0.0, 0.0}; // responsibility-weighted node coordinates
    double sq = 0.0;             // responsibility-weighted squared norm
};

KernelMoments kernel_moments(const GridDensity& p, double eps, std::span<const double> x) {
    // Two passes: the first finds the max log-weight, the second accumulates
    // with it subtracted.
    double max_log = 0.0;
    scan_kernel(p, eps, x, max_log, [](std::size_t, double) {});
    KernelMoments m;
    const std::size_t n1 = p.dim() == 2 ? p.points(1) : 1;
    double dummy = 0.0;
    scan_kernel(p, eps, x, dummy, [&](std::size_t flat, double l) {
        const double w = std::exp(l - max_log);
        m.z += w;
        if (p.dim() == 1) {
            const double c = p.coord(0, flat);
            m.mean[0] += w * c;
            m.sq += w * c * c;
        } else {
            const double c0 = p.coord(0, flat / n1);
            const double c1 = p.coord(1, flat % n1);
            m.mean[0] += w * c0;
            m.mean[1] += w * c1;
            m.sq += w * (c0 * c0 + c1 * c1);
        }
    });
    m.mean[0] /= m.z;
    m.mean[1] /= m.z;
    m.sq /= m.z;
    return m;
}

} // namespace

double smoothed_log_density(const GridDensity& p, double eps, std::span<const double> x) {
    if (!(eps > 0.0)) throw ConfigError("smoothing eps must be positive");
    double max_log = 0.0;
    double z = 0.0;
    scan_kernel(p, eps, x, max_log, [&](std::size_t, double) {});
    double dummy = 0.0;
    scan_kernel(p, eps, x, dummy,
                [&](std::size_t, double l) { z += std::exp(l - max_log); });
    const double d = p.dim();
    return max_log + std::log(z) -
           0.5 * d * std::log(2.0 * std::numbers::pi * eps);
}

std::array<double, 2> grid_mmse_point(const GridDensity& p, double eps,
                                      std::span<const double> x) {
    if (!(eps > 0.0)) throw ConfigError("smoothing eps must be positive");
    const KernelMoments m = kernel_moments(p, eps, x);
    return {m.mean[0], m.mean[1]};
}

double grid_denoising_variance_point(const GridDensity& p, double eps,
                                     std::span<const double> x) {
    if (!(eps > 0.0)) throw ConfigError("smoothing eps must be positive");
    const KernelMoments m = kernel_moments(p, eps, x);
    const double mean_sq = m.mean[0] * m.mean[0] + m.mean[1] * m.mean[1];
    return std::max(0.0, m.sq - mean_sq);
}

std::vector<double> grid_mmse_denoiser(const GridDensity& p, double eps,
                                       std::span<const double> xs) {
    if (p.dim() != 1) throw ConfigError("probe-vector evaluation is 1D only");
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        out[i] = grid_mmse_point(p, eps, {&xs[i], 1})[0];
    return out;
}

std::vector<double> grid_denoising_posterior_variance(const GridDensity& p, double eps,
                                                      std::span<const double> xs) {
    if (p.dim() != 1) throw ConfigError("probe-vector evaluation is 1D only");
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        out[i] = grid_denoising_variance_point(p, eps, {&xs[i], 1});
    return out;
}

double tweedie_residual(const GridDensity& p, double eps, std::span<const double> xs,
                        double h) {
    if (p.dim() != 1) throw ConfigError("score-identity residual is 1D only");
    if (!(h > 0.0)) throw ConfigError("difference spacing h must be positive");
    if (h >= 10.0 * p.step(0))
        throw ConfigError("difference spacing h too coarse for this grid");
    double worst = 0.0;
    for (const double x : xs) {
        const double xp = x + h, xm = x - h;
        const double grad =
            (smoothed_log_density(p, eps, {&xp, 1}) - smoothed_log_density(p, eps, {&xm, 1})) /
            (2.0 * h);
        const double den = grid_mmse_point(p, eps, {&x, 1})[0];
        worst = std::max(worst, std::abs(eps * grad - (den - x)));
    }
    return worst;
}

GridDensity grid_posterior(const GridDensity& prior,
                           const std::function<double(std::span<const double>)>& log_lik) {
    GridDensity post = prior;
    const std::size_t n1 = prior.dim() == 2 ? prior.points(1) : 1;
    std::vector<double> ll(prior.size());
    double max_ll = -std::numeric_limits<double>::infinity();
    double coords[2];
    for (std::size_t flat = 0; flat < prior.size(); ++flat) {
        if (prior.dim() == 1) {
            coords[0] = prior.coord(0, flat);
        } else {
            coords[0] = prior.coord(0, flat / n1);
            coords[1] = prior.coord(1, flat % n1);
        }
        ll[flat] = log_lik({coords, static_cast<std::size_t>(prior.dim())});
        if (prior.value(flat) > 0.0) max_ll = std::max(max_ll, ll[flat]);
    }
    if (!std::isfinite(max_ll))
        throw NumericError("degenerate likelihood: no mass survives the reweighting");
    for (std::size_t flat = 0; flat < prior.size(); ++flat) {
        post.values()[flat] = prior.value(flat) * std::exp(ll[flat] - max_ll);
    }
    post.normalize();
    return post;
}

namespace {

void check_same_geometry(const GridDensity& a, const GridDensity& b) {
    if (a.dim() != b.dim()) throw DimensionError("grids differ in dimension");
    for (int ax = 0; ax < a.dim(); ++ax) {
        if (a.points(ax) != b.points(ax) || a.low(ax) != b.low(ax) ||
            a.high(ax) != b.high(ax)) {
            throw DimensionError("grids differ in support or resolution");
        }
    }
}

} // namespace

double tv_distance(const GridDensity& a, const GridDensity& b) {
    check_same_geometry(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::abs(a.value(i) - b.value(i)) * a.quad_weight(i);
    return 0.5 * acc;
}

double histogram_tv(std::span<const double> samples, const GridDensity& density,
                    std::size_t bins, bool* underpowered) {
    if (density.dim() != 1) throw ConfigError("histogram comparison is 1D only");
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    if (samples.empty()) throw ConfigError("histogram needs samples");
    if (underpowered) *underpowered = samples.size() < 10 * bins;

    const double lo = density.low(0), hi = density.high(0);
    const double width = (hi - lo) / static_cast<double>(bins);

    std::vector<double> emp(bins, 0.0);
    double outside = 0.0;
    const double w = 1.0 / static_cast<double>(samples.size());
    for (const double s : samples) {
        if (s < lo || s > hi) {
            outside += w;
            continue;
        }
        auto b = static_cast<std::size_t>((s - lo) / width);
        if (b >= bins) b = bins - 1;
        emp[b] += w;
    }

    // Density mass per bin: grid cells assigned by midpoint, trapezoid mass
    // per cell. Bins are much coarser than the grid, so midpoint assignment
    // is exact to within one cell per bin edge.
    std::vector<double> den(bins, 0.0);
    const double h = density.step(0);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < density.points(0); ++i) {
        const double cell = 0.5 * (density.value(i) + density.value(i + 1)) * h;
        const double mid = density.coord(0, i) + 0.5 * h;
        auto b = static_cast<std::size_t>((mid - lo) / width);
        if (b >= bins) b = bins - 1;
        den[b] += cell;
        total += cell;
    }
    if (total > 0.0)
        for (double& v : den) v /= total;

    double acc = outside;
    for (std::size_t b = 0; b < bins; ++b) acc += std::abs(emp[b] - den[b]);
    return std::min(1.0, 0.5 * acc + 0.5 * outside);
}

double empirical_tv_2d(std::span<const double> ax, std::span<const double> ay,
                       std::span<const double> bx, std::span<const double> by,
                       double lo, double hi, std::size_t bins) {
    if (ax.size() != ay.size() || bx.size() != by.size())
        throw DimensionError("coordinate streams must pair up");
    if (ax.empty() || bx.empty()) throw ConfigError("histogram needs samples");
    if (!(hi > lo) || bins == 0) throw ConfigError("bad histogram domain");

    const double width = (hi - lo) / static_cast<double>(bins);
    auto fill = [&](std::span<const double> xs, std::span<const double> ys,
                    std::vector<double>& hist, double& outside) {
        const double w = 1.0 / static_cast<double>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] < lo || xs[i] > hi || ys[i] < lo || ys[i] > hi) {
                outside += w;
                continue;
            }
            auto cx = static_cast<std::size_t>((xs[i] - lo) / width);
            auto cy = static_cast<std::size_t>((ys[i] - lo) / width);
            if (cx >= bins) cx = bins - 1;
            if (cy >= bins) cy = bins - 1;
            hist[cx * bins + cy] += w;
        }
    };
    std::vector<double> ha(bins * bins, 0.0), hb(bins * bins, 0.0);
    double oa = 0.0, ob = 0.0;
    fill(ax, ay, ha, oa);
    fill(bx, by, hb, ob);
    double acc = std::abs(oa - ob);
    for (std::size_t i = 0; i < ha.size(); ++i) acc += std::abs(ha[i] - hb[i]);
    return 0.5 * acc;
}

std::vector<double> sample_from_grid(const GridDensity& density, std::size_t count,
                                     std::uint64_t seed) {
    if (density.dim() != 1) throw ConfigError("grid sampling is 1D only");
    const std::size_t n = density.points(0);
    // Piecewise-linear CDF over the trapezoid cell masses.
    std::vector<double> cdf(n, 0.0);
    const double h = density.step(0);
    for (std::size_t i = 1; i < n; ++i) {
        cdf[i] = cdf[i - 1] + 0.5 * (density.value(i - 1) + density.value(i)) * h;
    }
    const double total = cdf.back();
    if (!(total > 0.0)) throw NumericError("grid density has degenerate mass");
    for (double& c : cdf) c /= total;

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> out(count);
    for (std::size_t s = 0; s < count; ++s) {
        const double u = unif(gen);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        const auto i = static_cast<std::size_t>(
            std::clamp<std::ptrdiff_t>(it - cdf.begin(), 1, static_cast<std::ptrdiff_t>(n - 1)));
        const double seg = cdf[i] - cdf[i - 1];
        const double frac = seg > 0.0 ? (u - cdf[i - 1]) / seg : 0.5;
        out[s] = density.coord(0, i - 1) + frac * h;
    }
    return out;
}

std::vector<std::pair<double, double>> epsilon_convergence_curve(
    const GridDensity& prior,
    const std::function<double(std::span<const double>)>& log_lik,
    std::span<const double> eps_list) {
    for (std::size_t i = 1; i < eps_list.size(); ++i) {
        if (!(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("eps list must be strictly decreasing");
    }
    const GridDensity exact = grid_posterior(prior, log_lik);
    std::vector<std::pair<double, double>> curve;
    curve.reserve(eps_list.size() + 1);
    for (const double eps : eps_list) {
        const GridDensity smoothed = grid_smoothed_prior(prior, eps);
        curve.emplace_back(eps, tv_distance(grid_posterior(smoothed, log_lik), exact));
    }
    curve.emplace_back(0.0, 0.0);
    return curve;
}

GaussianPosterior::GaussianPosterior(std::vector<double> mean, std::vector<double> chol_lower)
    : mean_(std::move(mean)), chol_(std::move(chol_lower)) {
    if (chol_.size() != mean_.size() * mean_.size())
        throw DimensionError("posterior factor shape mismatch");
}

std::vector<double> GaussianPosterior::variance_diag() const {
    const std::size_t d = mean_.size();
    // Sigma = (L L^T)^{-1}, so Sigma_ii = ||L^{-1} e_i||^2 via one forward
    // substitution per coordinate.
    std::vector<double> var(d, 0.0), z(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::fill(z.begin(), z.end(), 0.0);
        z[i] = 1.0 / chol_[i * d + i];
        for (std::size_t r = i + 1; r < d; ++r) {
            double acc = 0.0;
            for (std::size_t c = i; c < r; ++c) acc += chol_[r * d + c] * z[c];
            z[r] = -acc / chol_[r * d + r];
        }
        double s = 0.0;
        for (std::size_t r = i; r < d; ++r) s += z[r] * z[r];
        var[i] = s;
    }
    return var;
}

GaussianPosterior gaussian_posterior(const LinearOperator& a, std::span<const double> y,
                                     double sigma, std::span<const double> prior_mean,
                                     double prior_var, double eps) {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(prior_var > 0.0)) throw ConfigError("prior variance must be positive");
    if (!(eps >= 0.0)) throw ConfigError("eps must be nonnegative");
    const std::size_t d = a.input_size();
    if (y.size() != a.output_size()) throw DimensionError("observation size mismatch");
    if (prior_mean.size() != d) throw DimensionError("prior mean size mismatch");

    const double inv_s2 = 1.0 / (sigma * sigma);
    const double inv_p = 1.0 / (prior_var + eps);

    // Dense precision built column by column: P_j = A^T (A e_j)/sigma^2.
    std::vector<double> prec(d * d, 0.0);
    std::vector<double> e(d, 0.0), u(a.output_size()), col(d);
    for (std::size_t j = 0; j < d; ++j) {
        e[j] = 1.0;
        a.apply(e, u);
        a.adjoint(u, col);
        for (std::size_t i = 0; i < d; ++i) prec[i * d + j] = col[i] * inv_s2;
        prec[j * d + j] += inv_p;
        e[j] = 0.0;
    }

    // rhs = A^T y / sigma^2 + m/(s^2+eps)
    std::vector<double> rhs(d);
    a.adjoint(y, rhs);
    for (std::size_t i = 0; i < d; ++i) rhs[i] = rhs[i] * inv_s2 + prior_mean[i] * inv_p;

    // In-place lower Cholesky of the precision.
    std::vector<double>& l = prec;
    for (std::size_t j = 0; j < d; ++j) {
        double s = l[j * d + j];
        for (std::size_t k = 0; k < j; ++k) s -= l[j * d + k] * l[j * d + k];
        if (!(s > 0.0)) throw NumericError("posterior precision is not positive definite");
        const double ljj = std::sqrt(s);
        l[j * d + j] = ljj;
        for (std::size_t i = j + 1; i < d; ++i) {
            double t = l[i * d + j];
            for (std::size_t k = 0; k < j; ++k) t -= l[i * d + k] * l[j * d + k];
            l[i * d + j] = t / ljj;
        }
        for (std::size_t c = j + 1; c < d; ++c) l[j * d + c] = 0.0;
    }

    // Solve L w = rhs, then L^T mu = w.
    std::vector<double> w(d), mu(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = rhs[i];
        for (std::size_t k = 0; k < i; ++k) acc -= l[i * d + k] * w[k];
        w[i] = acc / l[i * d + i];
    }
    for (std::size_t ri = d; ri-- > 0;) {
        double acc = w[ri];
        for (std::size_t k = ri + 1; k < d; ++k) acc -= l[k * d + ri] * mu[k];
        mu[ri] = acc / l[ri * d + ri];
    }
    return GaussianPosterior(std::move(mu), std::move(l));
}

} // namespace pnp
