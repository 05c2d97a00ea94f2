#include "pnp/sampler.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pnp/errors.hpp"
#include "pnp/kernels.hpp"

namespace pnp {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must be positive and finite, got " + fmt(v));
    }
}

} // namespace

std::string ValidationReport::to_string() const {
    std::string s;
    s += "lambda_max   = " + fmt(lambda_max) + (lambda_ok ? "  (ok)" : "  (violated)") + "\n";
    s += "lip_drift    = " + fmt(lip_drift) + (inpainting ? "  (likelihood excluded)" : "") + "\n";
    s += "delta_th     = " + fmt(delta_th) + (delta_ok ? "  (ok)" : "  (violated)") + "\n";
    if (m > 0.0) s += "delta_strong = " + fmt(delta_strong) + "\n";
    s += "ppnp_delta_max = " + fmt(ppnp_delta_max) + "\n";
    return s;
}

ValidationReport validate_config(const SamplerConfig& cfg, double l, double l_y,
                                 double m, bool inpainting) {
    check_positive(cfg.delta, "delta");
    check_positive(cfg.lambda, "lambda");
    check_positive(cfg.alpha, "alpha");
    check_positive(cfg.epsilon, "epsilon");
    if (!(cfg.c_lo < cfg.c_hi)) {
        throw ConfigError("constraint box is empty: c_lo=" + fmt(cfg.c_lo) +
                          " c_hi=" + fmt(cfg.c_hi));
    }
    if (cfg.n_iter == 0) throw ConfigError("n_iter must be at least 1");
    if (cfg.thinning == 0) throw ConfigError("thinning must be at least 1");
    if (cfg.burn_in >= cfg.n_iter) {
        throw ConfigError("burn_in (" + std::to_string(cfg.burn_in) +
                          ") must be smaller than n_iter (" + std::to_string(cfg.n_iter) + ")");
    }
    if (l < 0.0 || l_y < 0.0 || m < 0.0) {
        throw ConfigError("problem constants must be nonnegative");
    }

    ValidationReport r;
    r.l = l;
    r.l_y = l_y;
    r.m = m;
    r.inpainting = inpainting;

    const double prior_lip = cfg.alpha * l / cfg.epsilon;
    const double denom = 2.0 * l_y + prior_lip;
    r.lambda_max = denom > 0.0 ? 1.0 / (2.0 * denom)
                               : std::numeric_limits<double>::infinity();

    r.lip_drift = prior_lip + 1.0 / cfg.lambda + (inpainting ? 0.0 : l_y);
    r.delta_th = (1.0 / 3.0) / r.lip_drift;

    // The tail-weight and step-size rules bind the tail-regularized variant
    // only; the projected variant has no tail term and its step bound is
    // advisory (reported as ppnp_delta_max, warned about by the runner).
    if (cfg.variant == SamplerVariant::PnpUla) {
        r.lambda_ok = cfg.lambda <= r.lambda_max;
        r.delta_ok = cfg.delta < r.delta_th;
    } else {
        r.lambda_ok = true;
        r.delta_ok = true;
    }

    const double s = l_y + prior_lip;
    r.delta_strong = (m > 0.0 && s > 0.0) ? m / (2.0 * s * s)
                                          : std::numeric_limits<double>::quiet_NaN();

    const double ppnp_denom = prior_lip + (inpainting ? 0.0 : l_y);
    r.ppnp_delta_max = ppnp_denom > 0.0 ? 1.0 / ppnp_denom
                                        : std::numeric_limits<double>::infinity();
    return r;
}

std::size_t ProblemSpec::chain_dim() const {
    if (task == Task::Inpaint) {
        return mask ? image_size() - mask->kept_indices().size() : 0;
    }
    return image_size();
}

void ProblemSpec::check() const {
    if (height == 0 || width == 0) throw ConfigError("problem needs a nonempty image shape");
    if (!denoiser) throw ConfigError("problem needs a denoiser");
    switch (task) {
    case Task::Deblur:
    case Task::Denoise:
        if (!likelihood) throw ConfigError("deblur/denoise problems need a likelihood");
        if (likelihood->op().input_size() != image_size()) {
            throw DimensionError("likelihood operates on dimension " +
                                 std::to_string(likelihood->op().input_size()) +
                                 ", image has " + std::to_string(image_size()) + " pixels");
        }
        break;
    case Task::Inpaint: {
        if (!mask || mask->kind() != LinearOperator::Kind::Mask) {
            throw ConfigError("inpainting problems need a mask operator");
        }
        if (mask->input_size() != image_size()) {
            throw DimensionError("mask expects " + std::to_string(mask->input_size()) +
                                 " pixels, image has " + std::to_string(image_size()));
        }
        if (observation.size() != mask->kept_indices().size()) {
            throw DimensionError("observation has " + std::to_string(observation.size()) +
                                 " values, mask keeps " +
                                 std::to_string(mask->kept_indices().size()));
        }
        if (mask->hidden_indices().empty()) {
            throw ConfigError("mask hides no pixels; nothing to sample");
        }
        break;
    }
    case Task::PriorOnly:
        break;
    }
    if (ground_truth && (ground_truth->height() != height || ground_truth->width() != width)) {
        throw DimensionError("ground truth shape does not match the problem");
    }
}

void embed_inpainting(std::span<const double> x_hidden, const ProblemSpec& problem,
                      std::span<double> image) {
    const auto& kept = problem.mask->kept_indices();
    const auto& hidden = problem.mask->hidden_indices();
    if (x_hidden.size() != hidden.size() || image.size() != problem.image_size()) {
        throw DimensionError("embed_inpainting: size mismatch");
    }
    for (std::size_t i = 0; i < kept.size(); ++i) image[kept[i]] = problem.observation[i];
    for (std::size_t i = 0; i < hidden.size(); ++i) image[hidden[i]] = x_hidden[i];
}

void inpainting_reduced_drift(std::span<const double> x_hidden,
                              const ProblemSpec& problem, const SamplerConfig& cfg,
                              std::span<double> out, Workspace& ws) {
    const auto& hidden = problem.mask->hidden_indices();
    const std::size_t d = hidden.size();
    if (x_hidden.size() != d || out.size() != d) {
        throw DimensionError("inpainting_reduced_drift: size mismatch");
    }
    ws.embed.resize(problem.image_size());
    ws.den.resize(problem.image_size());
    embed_inpainting(x_hidden, problem, ws.embed);
    problem.denoiser->denoise(ws.embed, cfg.epsilon, ws.den);

    const double a = cfg.alpha / cfg.epsilon;
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t j = hidden[i];
        out[i] = a * (ws.den[j] - ws.embed[j]);
    }
    if (cfg.variant == SamplerVariant::PnpUla) {
        ws.proj.resize(d);
        kernels::clamp(x_hidden, cfg.c_lo, cfg.c_hi, ws.proj);
        const double t = 1.0 / cfg.lambda;
        kernels::axpy(t, ws.proj, out);
        kernels::axpy(-t, x_hidden, out);
    }
}

void drift_pnp(std::span<const double> x, const ProblemSpec& problem,
               const SamplerConfig& cfg, std::span<double> out, Workspace& ws) {
    if (problem.task == Task::Inpaint) {
        inpainting_reduced_drift(x, problem, cfg, out, ws);
        return;
    }
    const std::size_t d = x.size();
    if (out.size() != d) throw DimensionError("drift_pnp: size mismatch");

    if (problem.likelihood) {
        problem.likelihood->grad_log(x, out);
    } else {
        std::fill(out.begin(), out.end(), 0.0);
    }

    ws.den.resize(d);
    problem.denoiser->denoise(x, cfg.epsilon, ws.den);
    const double a = cfg.alpha / cfg.epsilon;
    kernels::axpy(a, ws.den, out);

    double x_coeff = -a;
    if (cfg.variant == SamplerVariant::PnpUla) {
        ws.proj.resize(d);
        kernels::clamp(x, cfg.c_lo, cfg.c_hi, ws.proj);
        const double t = 1.0 / cfg.lambda;
        kernels::axpy(t, ws.proj, out);
        x_coeff -= t;
    }
    kernels::axpy(x_coeff, x, out);
}

double step(ChainState& state, const ProblemSpec& problem, const SamplerConfig& cfg,
            Workspace& ws) {
    const std::size_t d = state.x.size();
    ws.drift.resize(d);
    ws.noise.resize(d);

    drift_pnp(state.x, problem, cfg, ws.drift, ws);
    state.rng.fill(ws.noise);

    const double noise_scale = std::sqrt(2.0 * cfg.delta);
    kernels::add_scaled2(state.x, cfg.delta, ws.drift, noise_scale, ws.noise, state.x);
    if (cfg.variant == SamplerVariant::PpnpUla) {
        kernels::clamp(state.x, cfg.c_lo, cfg.c_hi, state.x);
    }
    state.k += 1;

    const double ss = kernels::sumsq(state.x);
    if (!std::isfinite(ss)) {
        throw DivergenceError("chain state became non-finite at iteration " +
                              std::to_string(state.k));
    }
    return ss;
}

RunSummary run_chain(const ProblemSpec& problem, const SamplerConfig& cfg,
                     const std::vector<ChainObserver*>& observers,
                     std::optional<std::vector<double>> init, ChainState* io_state) {
    problem.check();

    const double l = problem.denoiser->residual_lipschitz(cfg.epsilon);
    const double l_y = (problem.likelihood && problem.task != Task::Inpaint)
                           ? problem.likelihood->lipschitz()
                           : 0.0;
    const double m = (problem.likelihood && problem.task != Task::Inpaint)
                         ? problem.likelihood->one_sided_m()
                         : 0.0;

    RunSummary summary;
    summary.report = validate_config(cfg, l, l_y, m, problem.task == Task::Inpaint);
    if (!summary.report.pass()) {
        const std::string msg = "sampler configuration rejected:\n" + summary.report.to_string();
        if (cfg.strict) throw ConfigError(msg);
        summary.warnings.push_back(msg);
    }
    if (cfg.variant == SamplerVariant::PpnpUla &&
        cfg.delta >= summary.report.ppnp_delta_max) {
        summary.warnings.push_back("projected variant: delta=" + fmt(cfg.delta) +
                                   " is at or above the guidance bound " +
                                   fmt(summary.report.ppnp_delta_max));
    }

    const std::size_t d = problem.chain_dim();
    ChainState state;
    const bool resuming = io_state != nullptr && !io_state->x.empty();
    if (resuming) {
        if (io_state->x.size() != d) {
            throw DimensionError("resumed state has dimension " +
                                 std::to_string(io_state->x.size()) + ", chain needs " +
                                 std::to_string(d));
        }
        state = std::move(*io_state);
    } else {
        state.rng = GaussianStream(cfg.seed);
        if (init) {
            if (init->size() != d) {
                throw DimensionError("initial state has dimension " +
                                     std::to_string(init->size()) + ", chain needs " +
                                     std::to_string(d));
            }
            state.x = std::move(*init);
        } else if ((problem.task == Task::Deblur || problem.task == Task::Denoise) &&
                   problem.likelihood->observation().size() == d) {
            state.x = problem.likelihood->observation();
        } else {
            state.x.assign(d, 0.0);
        }
        if (cfg.variant == SamplerVariant::PpnpUla) {
            kernels::clamp(state.x, cfg.c_lo, cfg.c_hi, state.x);
        }
    }

    Workspace ws;
    std::vector<double> image(problem.task == Task::Inpaint ? problem.image_size() : 0);

    // An excursion this far outside the constraint box means the step size is
    // fighting the tail weight; warn once instead of silently drifting on.
    const double box_diam = (cfg.c_hi - cfg.c_lo) * std::sqrt(static_cast<double>(d));
    bool warned_excursion = false;

    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t steps_here = 0;
    while (state.k < cfg.n_iter) {
        const double ss = step(state, problem, cfg, ws);
        steps_here += 1;
        if (!warned_excursion && std::sqrt(ss) > 10.0 * box_diam) {
            summary.warnings.push_back("state norm exceeded 10x the constraint diameter at iteration " +
                                       std::to_string(state.k));
            warned_excursion = true;
        }
        if (state.k > cfg.burn_in && (state.k - cfg.burn_in - 1) % cfg.thinning == 0) {
            std::span<const double> sample(state.x);
            if (problem.task == Task::Inpaint) {
                embed_inpainting(state.x, problem, image);
                sample = image;
            }
            try {
                for (ChainObserver* obs : observers) obs->observe(state.k, sample);
            } catch (const std::exception& e) {
                summary.partial = true;
                summary.warnings.push_back("observer failed at iteration " +
                                           std::to_string(state.k) + ": " + e.what());
                break;
            }
            summary.samples_delivered += 1;
        }
        summary.iterations = state.k;
    }
    summary.iterations = state.k;
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    summary.steps_per_sec = secs > 0.0 ? static_cast<double>(steps_here) / secs : 0.0;
    summary.final_x = state.x;
    if (io_state != nullptr) *io_state = std::move(state);
    return summary;
}

} // namespace pnp
