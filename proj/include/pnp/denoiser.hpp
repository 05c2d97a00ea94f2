#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pnp {

// A denoiser maps a noisy field to an estimate of the clean field at noise
// level eps (variance). The sampler only ever consumes denoise() and the
// declared residual-Lipschitz bound: the bound feeds the step-size and
// tail-weight rules, so declaring it too small is a correctness bug, not a
// tuning knob. residual_lipschitz_probe() below can refute a declaration.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual void denoise(std::span<const double> x, double eps,
                         std::span<double> out) const = 0;

    // Upper bound on the Lipschitz constant of x - denoise(x) at this eps.
    virtual double residual_lipschitz(double eps) const = 0;

    virtual std::string describe() const = 0;

    // (denoise(x) - x) / eps, the smoothed-prior score estimate.
    void score(std::span<const double> x, double eps, std::span<double> out) const;
};

class IdentityDenoiser final : public Denoiser {
public:
    void denoise(std::span<const double> x, double eps,
                 std::span<double> out) const override;
    double residual_lipschitz(double) const override { return 0.0; }
    std::string describe() const override { return "identity"; }
};

// Exact MMSE denoiser for a Gaussian prior N(mean, s^2 I):
//   denoise(x) = (s^2 x + eps*mean) / (s^2 + eps).
// mean may be a scalar (broadcast) or a full field.
class GaussianDenoiser final : public Denoiser {
public:
    GaussianDenoiser(double mean, double variance);
    GaussianDenoiser(std::vector<double> mean, double variance);

    void denoise(std::span<const double> x, double eps,
                 std::span<double> out) const override;
    double residual_lipschitz(double eps) const override;
    std::string describe() const override;

    double variance() const { return s2_; }

private:
    std::vector<double> mean_; // empty means scalar
    double mean_scalar_ = 0.0;
    double s2_;
};

// Exact MMSE denoiser for an isotropic Gaussian mixture prior
// sum_j w_j N(mu_j, s_j^2 I) over the full vector:
//   r_j(x) prop. to w_j N(x; mu_j, (s_j^2+eps) I)      (log-domain)
//   denoise(x) = sum_j r_j(x) (s_j^2 x + eps mu_j)/(s_j^2+eps).
// Means are scalars broadcast over the field or full vectors.
struct GmmComponent {
    double weight;
    std::vector<double> mean; // size 1 = scalar broadcast
    double variance;
};

class GmmDenoiser final : public Denoiser {
public:
    // declared_l overrides the automatic residual-Lipschitz bound. The
    // closed-form bound (eps/v)*max(1, D^2/(4v)-1) is only valid for equal
    // component variances; unequal variances must declare one.
    GmmDenoiser(std::vector<GmmComponent> components,
                std::optional<double> declared_l = std::nullopt);

    void denoise(std::span<const double> x, double eps,
                 std::span<double> out) const override;
    double residual_lipschitz(double eps) const override;
    std::string describe() const override;

    // Posterior responsibilities at x (exposed for tests).
    std::vector<double> responsibilities(std::span<const double> x, double eps) const;

private:
    double mean_at(const GmmComponent& c, std::size_t i) const {
        return c.mean.size() == 1 ? c.mean[0] : c.mean[i];
    }
    std::vector<GmmComponent> comps_;
    std::optional<double> declared_l_;
    bool equal_variance_;
    double max_mean_dist_sq_per_dim_; // per broadcast scalars; full vectors store true D^2
    bool scalar_means_;
};

// Product of one identical 1D GMM per pixel: the "pull each pixel toward a
// small set of levels" prior. Same 1D closed forms as GmmDenoiser applied
// coordinatewise; the Jacobian is diagonal so the residual-Lipschitz bound is
// the 1D bound itself.
class PixelGmmDenoiser final : public Denoiser {
public:
    PixelGmmDenoiser(std::vector<double> weights, std::vector<double> levels,
                     std::vector<double> variances);

    void denoise(std::span<const double> x, double eps,
                 std::span<double> out) const override;
    double residual_lipschitz(double eps) const override;
    std::string describe() const override;

    double denoise_scalar(double x, double eps) const;

private:
    std::vector<double> w_, mu_, s2_;
    bool equal_variance_;
};

// Empirical sup of ||res(x1)-res(x2)|| / ||x1-x2|| over random pairs in
// [lo,hi]^d, res(x) = x - denoise(x). Lower bound on the true constant; used
// to refute declared bounds.
double residual_lipschitz_probe(const Denoiser& den, std::size_t d, double eps,
                                int n_pairs, std::uint64_t seed, double lo, double hi);

} // namespace pnp
