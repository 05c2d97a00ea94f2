#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnp/denoiser.hpp"
#include "pnp/field.hpp"
#include "pnp/ops.hpp"
#include "pnp/rng.hpp"

namespace pnp {

enum class SamplerVariant {
    PnpUla,  // tail-regularized: drift carries (proj_C(x) - x)/lambda
    PpnpUla, // projected: no tail term, state projected onto C each step
};

struct SamplerConfig {
    double delta = 0.0;
    double lambda = 1.0;
    double alpha = 1.0;
    double epsilon = 0.0;
    double c_lo = -1.0;
    double c_hi = 2.0;
    std::uint64_t n_iter = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thinning = 1;
    std::uint64_t seed = 0;
    SamplerVariant variant = SamplerVariant::PnpUla;
    // strict refuses configs that fail the step-size/tail-weight rules;
    // turning it off downgrades the refusal to a warning for exploration.
    bool strict = true;
};

// Step-size and tail-weight admissibility derived from the problem constants:
//   L   residual-Lipschitz bound of the denoiser at eps
//   L_y Lipschitz constant of the likelihood gradient (0 when absent)
//   m   strong-concavity constant of the likelihood (0 when none)
struct ValidationReport {
    double l = 0.0, l_y = 0.0, m = 0.0;
    double lambda_max = 0.0;     // +inf sentinel when both constants vanish
    double lip_drift = 0.0;      // alpha*L/eps + 1/lambda (+ L_y unless inpainting)
    double delta_th = 0.0;       // (1/3) / lip_drift
    double delta_strong = 0.0;   // m/(2 (L_y + alpha*L/eps)^2), NaN when m == 0
    double ppnp_delta_max = 0.0; // 1/(alpha*L/eps + L_y), guidance only
    bool lambda_ok = false;
    bool delta_ok = false;
    bool inpainting = false;
    bool pass() const { return lambda_ok && delta_ok; }
    std::string to_string() const;
};

ValidationReport validate_config(const SamplerConfig& cfg, double l, double l_y,
                                 double m = 0.0, bool inpainting = false);

enum class Task { Deblur, Denoise, Inpaint, PriorOnly };

// Everything the chain needs to evaluate its drift. For Deblur/Denoise the
// chain state is the full image and `likelihood` must be set. For Inpaint the
// state is the hidden-pixel vector: `mask` selects the observed pixels,
// `observation` holds their values, and there is no likelihood term (the
// noiseless constraint is folded in by embedding). PriorOnly drops the data
// term entirely.
struct ProblemSpec {
    Task task = Task::PriorOnly;
    std::size_t height = 0;
    std::size_t width = 0;
    std::optional<GaussianLikelihood> likelihood;
    std::optional<LinearOperator> mask;
    std::vector<double> observation;
    std::shared_ptr<const Denoiser> denoiser;
    std::optional<ImageField> ground_truth;

    std::size_t image_size() const { return height * width; }
    std::size_t chain_dim() const;
    void check() const; // throws ConfigError/DimensionError on inconsistency
};

struct ChainState {
    std::vector<double> x;
    std::uint64_t k = 0;
    GaussianStream rng;
};

// Scratch buffers reused across steps; one per chain.
struct Workspace {
    std::vector<double> drift, den, noise, proj, embed, grad;
};

// Full drift of the tail-regularized chain at x (chain coordinates):
//   grad log p(y|x) + (alpha/eps)(D(x) - x) + (proj_C(x) - x)/lambda
// Inpainting delegates to inpainting_reduced_drift.
void drift_pnp(std::span<const double> x, const ProblemSpec& problem,
               const SamplerConfig& cfg, std::span<double> out, Workspace& ws);

// Reduced-chain drift on the hidden coordinates:
//   (alpha/eps) P (D - Id)(embed(x_hidden)) + (proj_C(x_hidden) - x_hidden)/lambda
// where embed scatters hidden values and pins observed pixels to y.
void inpainting_reduced_drift(std::span<const double> x_hidden,
                              const ProblemSpec& problem, const SamplerConfig& cfg,
                              std::span<double> out, Workspace& ws);

// Scatters a reduced state into the full image (observed pixels = y).
void embed_inpainting(std::span<const double> x_hidden, const ProblemSpec& problem,
                      std::span<double> image);

// One transition. Advances state.x, state.k, and consumes exactly
// state.x.size() normal draws. Throws DivergenceError on non-finite state;
// returns the squared norm of the new state (reused by the runner's
// excursion warning).
double step(ChainState& state, const ProblemSpec& problem, const SamplerConfig& cfg,
            Workspace& ws);

// Posterior-sample consumer. observe() is called with the iteration index and
// the sample mapped to image space (inpainting states are embedded first).
class ChainObserver {
public:
    virtual ~ChainObserver() = default;
    virtual void observe(std::uint64_t k, std::span<const double> sample) = 0;
};

struct RunSummary {
    std::uint64_t iterations = 0;
    std::uint64_t samples_delivered = 0;
    bool partial = false; // an observer threw; run stopped early
    std::vector<std::string> warnings;
    double steps_per_sec = 0.0;
    ValidationReport report;
    std::vector<double> final_x;
};

// Runs the chain up to cfg.n_iter total iterations. Initial state: supplied
// init, else y for Deblur/Denoise, zeros otherwise; the projected variant
// projects the initial state onto C. Samples are delivered for k > burn_in
// at stride thinning, the first at k = burn_in + 1.
//
// Passing io_state lets callers resume: a nonempty io_state->x continues from
// its k and rng (producing the identical trajectory a single full run would),
// and on return it holds the final state either way.
RunSummary run_chain(const ProblemSpec& problem, const SamplerConfig& cfg,
                     const std::vector<ChainObserver*>& observers,
                     std::optional<std::vector<double>> init = std::nullopt,
                     ChainState* io_state = nullptr);

} // namespace pnp
