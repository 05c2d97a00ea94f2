#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pnp/field.hpp"

namespace pnp {

// Linear measurement operators for y = A x + n. Three kinds cover the
// experiments: identity, circular (periodic-boundary) convolution with a
// small nonnegative kernel summing to 1, and row-selection masks that keep a
// sorted subset of pixels.
class LinearOperator {
public:
    enum class Kind { Identity, PeriodicConvolution, Mask };

    static LinearOperator identity(std::size_t h, std::size_t w);
    static LinearOperator periodic_convolution(ImageField kernel, std::size_t h,
                                               std::size_t w);
    static LinearOperator mask(std::size_t h, std::size_t w,
                               std::vector<std::size_t> kept);

    // Normalized box kernel of odd size. Even size is a configuration error;
    // the kernel must fit inside the image.
    static LinearOperator box_blur(std::size_t size, std::size_t h, std::size_t w);

    // Keeps exactly round((1 - hidden_fraction) * h * w) pixels, chosen
    // uniformly with the given seed; kept indices sorted ascending.
    static LinearOperator random_mask(std::size_t h, std::size_t w,
                                      double hidden_fraction, std::uint64_t seed);

    void apply(std::span<const double> x, std::span<double> out) const;
    void adjoint(std::span<const double> y, std::span<double> out) const;

    Kind kind() const { return kind_; }
    std::size_t image_height() const { return h_; }
    std::size_t image_width() const { return w_; }
    std::size_t input_size() const { return h_ * w_; }
    std::size_t output_size() const;

    const std::vector<std::size_t>& kept_indices() const;
    // Complement of kept_indices, also sorted (the latent pixels of an
    // inpainting problem).
    const std::vector<std::size_t>& hidden_indices() const;
    const ImageField& kernel() const;

private:
    LinearOperator() = default;

    void conv_apply(std::span<const double> x, std::span<double> out,
                    bool flipped) const;

    Kind kind_ = Kind::Identity;
    std::size_t h_ = 0, w_ = 0;
    ImageField kernel_;                 // PeriodicConvolution
    bool separable_ = false;
    std::vector<double> sep_row_, sep_col_;
    std::vector<std::size_t> kept_;     // Mask
    std::vector<std::size_t> hidden_;   // complement of kept_
};

struct OperatorNormResult {
    double value = 0.0;   // estimate of ||A^T A||_2
    bool converged = false;
    int iterations = 0;
};

// Power iteration on A^T A from a seeded random start; Rayleigh-quotient
// estimate, relative-change stopping rule.
OperatorNormResult operator_norm_sq(const LinearOperator& op, int max_iters = 1000,
                                    double tol = 1e-12, std::uint64_t seed = 17);

// Gaussian likelihood p(y|x) = N(y; A x, sigma^2 I).
class GaussianLikelihood {
public:
    GaussianLikelihood(LinearOperator op, std::vector<double> y, double sigma);

    // out = A^T (y - A x) / sigma^2
    void grad_log(std::span<const double> x, std::span<double> out) const;

    // -||A x - y||^2 / (2 sigma^2), additive constant dropped.
    double log_density(std::span<const double> x) const;

    double sigma() const { return sigma_; }
    const std::vector<double>& observation() const { return y_; }
    const LinearOperator& op() const { return op_; }

    // Lipschitz constant of grad_log: ||A^T A|| / sigma^2.
    double lipschitz() const { return l_y_; }
    // One-sided (strong concavity) constant; positive only when A^T A is
    // bounded below, which of these operator kinds only identity is.
    double one_sided_m() const { return m_; }

private:
    LinearOperator op_;
    std::vector<double> y_;
    double sigma_;
    double l_y_;
    double m_;
    mutable std::vector<double> scratch_;
};

// Empirical probes for the analytic constants, used by the verification
// suites. Both sample n_pairs random pairs in [lo,hi]^d.
double gradient_lipschitz_probe(const GaussianLikelihood& lik, int n_pairs,
                                std::uint64_t seed, double lo, double hi);
// max over pairs of <grad(x2)-grad(x1), x2-x1> / ||x2-x1||^2 (should be <= -m).
double one_sided_probe(const GaussianLikelihood& lik, int n_pairs, std::uint64_t seed,
                       double lo, double hi);

} // namespace pnp
