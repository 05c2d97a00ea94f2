#include "pnp/denoiser.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pnp/errors.hpp"
#include "pnp/kernels.hpp"

namespace pnp {

void Denoiser::score(std::span<const double> x, double eps,
                     std::span<double> out) const {
    if (!(eps > 0.0)) throw ConfigError("score: eps must be positive");
    denoise(x, eps, out);
    // (D(x) - x)/eps without an extra buffer: out currently holds D(x).
    const double inv = 1.0 / eps;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - x[i]) * inv;
}

void IdentityDenoiser::denoise(std::span<const double> x, double,
                               std::span<double> out) const {
    if (x.size() != out.size()) throw DimensionError("denoise: size mismatch");
    std::copy(x.begin(), x.end(), out.begin());
}

GaussianDenoiser::GaussianDenoiser(double mean, double variance)
    : mean_scalar_(mean), s2_(variance) {
    if (!(s2_ > 0.0)) throw ConfigError("gaussian denoiser variance must be positive");
}

GaussianDenoiser::GaussianDenoiser(std::vector<double> mean, double variance)
    : mean_(std::move(mean)), s2_(variance) {
    if (!(s2_ > 0.0)) throw ConfigError("gaussian denoiser variance must be positive");
    if (mean_.empty()) throw ConfigError("gaussian denoiser mean vector is empty");
}

void GaussianDenoiser::denoise(std::span<const double> x, double eps,
                               std::span<double> out) const {
    if (x.size() != out.size()) throw DimensionError("denoise: size mismatch");
    if (!(eps > 0.0)) throw ConfigError("denoise: eps must be positive");
    const double v = s2_ + eps;
    const double a = s2_ / v;
    if (mean_.empty()) {
        kernels::scale_shift(x, a, eps * mean_scalar_ / v, out);
    } else {
        if (mean_.size() != x.size())
            throw DimensionError("gaussian denoiser mean size mismatch");
        kernels::scale_shift(x, a, 0.0, out);
        kernels::axpy(eps / v, mean_, out);
    }
}

double GaussianDenoiser::residual_lipschitz(double eps) const {
    if (!(eps > 0.0)) throw ConfigError("residual_lipschitz: eps must be positive");
    return eps / (s2_ + eps);
}

std::string GaussianDenoiser::describe() const {
    std::ostringstream os;
    os << "gaussian(s2=" << s2_;
    if (mean_.empty())
        os << ", mean=" << mean_scalar_;
    else
        os << ", mean=<field>";
    os << ")";
    return os.str();
}

// ---------------------------------------------------------------------------
// Full-vector isotropic GMM
// ---------------------------------------------------------------------------

GmmDenoiser::GmmDenoiser(std::vector<GmmComponent> components,
                         std::optional<double> declared_l)
    : comps_(std::move(components)), declared_l_(declared_l) {
    if (comps_.empty()) throw ConfigError("gmm denoiser needs at least one component");
    double wsum = 0.0;
    std::size_t mean_dim = comps_.front().mean.size();
    scalar_means_ = mean_dim == 1;
    for (const auto& c : comps_) {
        if (!(c.weight > 0.0)) throw ConfigError("gmm weights must be positive");
        if (!(c.variance > 0.0)) throw ConfigError("gmm variances must be positive");
        if (c.mean.empty()) throw ConfigError("gmm component mean is empty");
        if (c.mean.size() != mean_dim)
            throw ConfigError("gmm component means must share one dimension");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw ConfigError("gmm weights must sum to 1");

    equal_variance_ = true;
    for (const auto& c : comps_)
        if (std::abs(c.variance - comps_.front().variance) > 1e-15)
            equal_variance_ = false;

    max_mean_dist_sq_per_dim_ = 0.0;
    for (std::size_t a = 0; a < comps_.size(); ++a) {
        for (std::size_t b = a + 1; b < comps_.size(); ++b) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < mean_dim; ++i) {
                const double diff = comps_[a].mean[i] - comps_[b].mean[i];
                d2 += diff * diff;
            }
            max_mean_dist_sq_per_dim_ = std::max(max_mean_dist_sq_per_dim_, d2);
        }
    }

    if (!equal_variance_ && !declared_l_)
        throw ConfigError(
            "gmm denoiser with unequal component variances has no closed-form "
            "residual-Lipschitz bound; declare one explicitly");
}

std::vector<double> GmmDenoiser::responsibilities(std::span<const double> x,
                                                  double eps) const {
    const auto J = comps_.size();
    std::vector<double> logw(J);
    const auto d = static_cast<double>(x.size());
    for (std::size_t j = 0; j < J; ++j) {
        const auto& c = comps_[j];
        if (c.mean.size() != 1 && c.mean.size() != x.size())
            throw DimensionError("gmm mean dimension does not match input");
        const double v = c.variance + eps;
        double q = 0.0;
        if (c.mean.size() == 1) {
            const double mu = c.mean[0];
            for (const double xi : x) q += (xi - mu) * (xi - mu);
        } else {
            for (std::size_t i = 0; i < x.size(); ++i)
                q += (x[i] - c.mean[i]) * (x[i] - c.mean[i]);
        }
        logw[j] = std::log(c.weight) - 0.5 * d * std::log(2.0 * std::numbers::pi * v) -
                  q / (2.0 * v);
    }
    // Max-subtracted softmax keeps the far-from-everything case finite.
    double m = logw[0];
    for (double lw : logw) m = std::max(m, lw);
    double sum = 0.0;
    std::vector<double> r(J);
    for (std::size_t j = 0; j < J; ++j) {
        r[j] = std::exp(logw[j] - m);
        sum += r[j];
    }
    for (double& rj : r) rj /= sum;
    return r;
}

void GmmDenoiser::denoise(std::span<const double> x, double eps,
                          std::span<double> out) const {
    if (x.size() != out.size()) throw DimensionError("denoise: size mismatch");
    if (!(eps > 0.0)) throw ConfigError("denoise: eps must be positive");
    const std::vector<double> r = responsibilities(x, eps);

    // out = (sum_j r_j s_j^2/v_j) x + sum_j r_j (eps/v_j) mu_j
    double a = 0.0;
    for (std::size_t j = 0; j < comps_.size(); ++j)
        a += r[j] * comps_[j].variance / (comps_[j].variance + eps);
    double b_scalar = 0.0;
    bool all_scalar = true;
    for (const auto& c : comps_) all_scalar = all_scalar && c.mean.size() == 1;
    if (all_scalar) {
        for (std::size_t j = 0; j < comps_.size(); ++j)
            b_scalar +=
                r[j] * eps * comps_[j].mean[0] / (comps_[j].variance + eps);
        kernels::scale_shift(x, a, b_scalar, out);
    } else {
        kernels::scale_shift(x, a, 0.0, out);
        for (std::size_t j = 0; j < comps_.size(); ++j) {
            const auto& c = comps_[j];
            const double coef = r[j] * eps / (c.variance + eps);
            if (c.mean.size() == 1) {
                for (double& o : out) o += coef * c.mean[0];
            } else {
                kernels::axpy(coef, c.mean, out);
            }
        }
    }
}

double GmmDenoiser::residual_lipschitz(double eps) const {
    if (!(eps > 0.0)) throw ConfigError("residual_lipschitz: eps must be positive");
    if (declared_l_) return *declared_l_;
    // Equal-variance closed form. The residual Jacobian is
    // (eps/v)(I - Cov_r(mu)/v); Cov_r eigenvalues lie in [0, D^2/4], so the
    // spectral norm is at most (eps/v) max(1, D^2/(4v) - 1), attained where
    // responsibilities balance. Scalar-broadcast means measure D in one
    // dimension; broadcasting those into d > 1 scales D^2 by d, so such uses
    // must declare a bound instead.
    const double v = comps_.front().variance + eps;
    return (eps / v) * std::max(1.0, max_mean_dist_sq_per_dim_ / (4.0 * v) - 1.0);
}

std::string GmmDenoiser::describe() const {
    std::ostringstream os;
    os << "gmm(" << comps_.size() << " components)";
    return os.str();
}

// ---------------------------------------------------------------------------
// Per-pixel product GMM
// ---------------------------------------------------------------------------

PixelGmmDenoiser::PixelGmmDenoiser(std::vector<double> weights,
                                   std::vector<double> levels,
                                   std::vector<double> variances)
    : w_(std::move(weights)), mu_(std::move(levels)), s2_(std::move(variances)) {
    if (w_.empty() || w_.size() != mu_.size() || w_.size() != s2_.size())
        throw ConfigError("pixel gmm: weights/levels/variances sizes must match");
    double wsum = 0.0;
    for (double w : w_) {
        if (!(w > 0.0)) throw ConfigError("pixel gmm weights must be positive");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw ConfigError("pixel gmm weights must sum to 1");
    equal_variance_ = true;
    for (double v : s2_) {
        if (!(v > 0.0)) throw ConfigError("pixel gmm variances must be positive");
        if (std::abs(v - s2_.front()) > 1e-15) equal_variance_ = false;
    }
    if (!equal_variance_)
        throw ConfigError("pixel gmm requires equal per-level variances");
}

double PixelGmmDenoiser::denoise_scalar(double x, double eps) const {
    const std::size_t J = w_.size();
    double m = -std::numeric_limits<double>::infinity();
    double lw[16];
    if (J > 16) throw ConfigError("pixel gmm supports at most 16 levels");
    for (std::size_t j = 0; j < J; ++j) {
        const double v = s2_[j] + eps;
        const double d = x - mu_[j];
        lw[j] = std::log(w_[j]) - 0.5 * std::log(v) - d * d / (2.0 * v);
        m = std::max(m, lw[j]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
        const double v = s2_[j] + eps;
        const double r = std::exp(lw[j] - m);
        den += r;
        num += r * (s2_[j] * x + eps * mu_[j]) / v;
    }
    return num / den;
}

void PixelGmmDenoiser::denoise(std::span<const double> x, double eps,
                               std::span<double> out) const {
    if (x.size() != out.size()) throw DimensionError("denoise: size mismatch");
    if (!(eps > 0.0)) throw ConfigError("denoise: eps must be positive");
    // Hoist the per-level quadratic coefficients; the pixel loop is then one
    // exp per level per pixel.
    const std::size_t J = w_.size();
    double q[16], l[16], c0[16], a[16], b[16];
    for (std::size_t j = 0; j < J; ++j) {
        const double v = s2_[j] + eps;
        q[j] = -0.5 / v;
        l[j] = mu_[j] / v;
        c0[j] = std::log(w_[j]) - 0.5 * std::log(v) - mu_[j] * mu_[j] / (2.0 * v);
        a[j] = s2_[j] / v;
        b[j] = eps * mu_[j] / v;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double x2 = xi * xi;
        double m = -std::numeric_limits<double>::infinity();
        double lw[16];
        for (std::size_t j = 0; j < J; ++j) {
            lw[j] = q[j] * x2 + l[j] * xi + c0[j];
            m = std::max(m, lw[j]);
        }
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            const double r = std::exp(lw[j] - m);
            den += r;
            num += r * (a[j] * xi + b[j]);
        }
        out[i] = num / den;
    }
}

double PixelGmmDenoiser::residual_lipschitz(double eps) const {
    if (!(eps > 0.0)) throw ConfigError("residual_lipschitz: eps must be positive");
    // Diagonal Jacobian: the field-level constant is the 1D equal-variance
    // bound over the levels.
    double dmax2 = 0.0;
    for (std::size_t a = 0; a < mu_.size(); ++a)
        for (std::size_t b = a + 1; b < mu_.size(); ++b)
            dmax2 = std::max(dmax2, (mu_[a] - mu_[b]) * (mu_[a] - mu_[b]));
    const double v = s2_.front() + eps;
    return (eps / v) * std::max(1.0, dmax2 / (4.0 * v) - 1.0);
}

std::string PixelGmmDenoiser::describe() const {
    std::ostringstream os;
    os << "gmm-pixel(" << w_.size() << " levels)";
    return os.str();
}

double residual_lipschitz_probe(const Denoiser& den, std::size_t d, double eps,
                                int n_pairs, std::uint64_t seed, double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("probe box must satisfy lo < hi");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x1(d), x2(d), r1(d), r2(d);
    double worst = 0.0;
    for (int p = 0; p < n_pairs; ++p) {
        for (double& e : x1) e = u(gen);
        for (double& e : x2) e = u(gen);
        den.denoise(x1, eps, r1);
        den.denoise(x2, eps, r2);
        // residual = x - D(x)
        double num = 0.0, denom = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dr = (x1[i] - r1[i]) - (x2[i] - r2[i]);
            const double dx = x1[i] - x2[i];
            num += dr * dr;
            denom += dx * dx;
        }
        if (denom > 0.0) worst = std::max(worst, std::sqrt(num / denom));
    }
    return worst;
}

} // namespace pnp
