#include "pnp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "pnp/checkpoint.hpp"
#include "pnp/errors.hpp"
#include "pnp/external.hpp"
#include "pnp/image_io.hpp"
#include "pnp/kernels.hpp"

namespace pnp {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<std::string> split_command(const std::string& cmd) {
    std::vector<std::string> argv;
    std::istringstream in(cmd);
    std::string tok;
    while (in >> tok) argv.push_back(tok);
    return argv;
}

Task parse_task(const std::string& name) {
    if (name == "deblur") return Task::Deblur;
    if (name == "denoise") return Task::Denoise;
    if (name == "inpaint") return Task::Inpaint;
    if (name == "prior-only") return Task::PriorOnly;
    throw ConfigError("unknown task '" + name + "' (deblur|denoise|inpaint|prior-only)");
}

SamplerVariant parse_variant(const std::string& name) {
    if (name == "pnp-ula") return SamplerVariant::PnpUla;
    if (name == "ppnp-ula") return SamplerVariant::PpnpUla;
    throw ConfigError("unknown sampler variant '" + name + "' (pnp-ula|ppnp-ula)");
}

// PGM previews clamp to [0,1]; uncertainty maps get rescaled by their peak so
// the preview is legible. Raw files always carry the honest values.
void write_preview_scaled(const ImageField& map, const std::string& path) {
    double peak = 0.0;
    for (const double v : map.values()) peak = std::max(peak, v);
    ImageField scaled = map;
    if (peak > 0.0)
        for (double& v : scaled.values()) v /= peak;
    write_field_pgm(scaled, path);
}

// Hash of the fields that shape the chain's trajectory: problem inputs,
// denoiser, and the sampler parameters. A continuation is allowed to change
// the horizon, output locations, and diagnostics, so those are reset to
// defaults before hashing; anything else differing means the checkpoint
// belongs to a different experiment.
std::string trajectory_hash(ExperimentConfig cfg) {
    const ExperimentConfig defaults;
    cfg.output_dir = defaults.output_dir;
    // blur_size and sigma stay: deblur/denoise rebuild the operator and the
    // likelihood from them at sampling time. The other degradation knobs only
    // matter to cmd_degrade, which has already produced the observation.
    cfg.hidden_fraction = defaults.hidden_fraction;
    cfg.degrade_seed = defaults.degrade_seed;
    cfg.n_iter = defaults.n_iter;
    cfg.burn_in = defaults.burn_in;
    cfg.thinning = defaults.thinning;
    cfg.n_chains = defaults.n_chains;
    cfg.strict = defaults.strict;
    cfg.std_maps = defaults.std_maps;
    cfg.fourier = defaults.fourier;
    cfg.multiscale = defaults.multiscale;
    cfg.multiscale_i_max = defaults.multiscale_i_max;
    cfg.acf_max_lag = defaults.acf_max_lag;
    cfg.trace_stride = defaults.trace_stride;
    cfg.select_warmup = defaults.select_warmup;
    cfg.psnr_trace = defaults.psnr_trace;
    cfg.std_snapshots = defaults.std_snapshots;
    cfg.write_pgm = defaults.write_pgm;
    cfg.write_checkpoint = defaults.write_checkpoint;
    cfg.resume_from.clear();
    return config_hash(cfg);
}

} // namespace

ImageField load_image(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm")
        return read_field_pgm(path);
    return read_field_raw(path);
}

std::shared_ptr<const Denoiser> build_denoiser(const ExperimentConfig& cfg) {
    if (cfg.denoiser == "identity") return std::make_shared<IdentityDenoiser>();
    if (cfg.denoiser == "gaussian") {
        return std::make_shared<GaussianDenoiser>(cfg.prior_mean, cfg.prior_var);
    }
    if (cfg.denoiser == "gmm") {
        const std::vector<double> means = parse_double_list(cfg.gmm_means);
        const std::vector<double> weights = parse_double_list(cfg.gmm_weights);
        if (means.size() != weights.size())
            throw ConfigError("gmm_means and gmm_weights must have the same length");
        std::vector<GmmComponent> comps;
        comps.reserve(means.size());
        for (std::size_t i = 0; i < means.size(); ++i) {
            comps.push_back({weights[i], {means[i]}, cfg.gmm_var});
        }
        return std::make_shared<GmmDenoiser>(std::move(comps), cfg.declared_l);
    }
    if (cfg.denoiser == "gmm-pixel") {
        const std::vector<double> levels = parse_double_list(cfg.gmm_means);
        const std::vector<double> weights = parse_double_list(cfg.gmm_weights);
        if (levels.size() != weights.size())
            throw ConfigError("gmm_means and gmm_weights must have the same length");
        return std::make_shared<PixelGmmDenoiser>(
            weights, levels, std::vector<double>(levels.size(), cfg.gmm_var));
    }
    if (cfg.denoiser == "external") {
        if (cfg.external_command.empty())
            throw ConfigError("external denoiser needs denoiser.command");
        if (!cfg.declared_l)
            throw ConfigError("external denoiser needs an explicit declared_l");
        return std::make_shared<ExternalDenoiser>(split_command(cfg.external_command),
                                                  *cfg.declared_l);
    }
    throw ConfigError("unknown denoiser '" + cfg.denoiser +
                      "' (identity|gaussian|gmm|gmm-pixel|external)");
}

void write_mask_file(const std::string& path, std::size_t h, std::size_t w,
                     const std::vector<std::size_t>& kept) {
    std::ofstream out(path);
    if (!out) throw TransportError("cannot open " + path + " for writing");
    out << h << " " << w << "\n";
    for (const std::size_t i : kept) out << i << "\n";
    if (!out) throw TransportError("failed writing " + path);
}

LinearOperator read_mask_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TransportError("cannot open mask file " + path);
    std::size_t h = 0, w = 0;
    if (!(in >> h >> w)) throw TransportError("mask file " + path + ": bad header");
    std::vector<std::size_t> kept;
    std::size_t idx;
    while (in >> idx) kept.push_back(idx);
    if (!in.eof()) throw TransportError("mask file " + path + ": non-numeric entry");
    return LinearOperator::mask(h, w, std::move(kept));
}

ProblemSpec build_problem(const ExperimentConfig& cfg) {
    ProblemSpec problem;
    problem.task = parse_task(cfg.task);

    std::optional<ImageField> truth;
    if (!cfg.input.empty()) truth = load_image(cfg.input);

    switch (problem.task) {
    case Task::Deblur:
    case Task::Denoise: {
        if (cfg.observation.empty())
            throw ConfigError("task '" + cfg.task + "' needs an observation file");
        ImageField y = read_field_raw(cfg.observation);
        problem.height = y.height();
        problem.width = y.width();
        LinearOperator op =
            problem.task == Task::Deblur
                ? LinearOperator::box_blur(cfg.blur_size, y.height(), y.width())
                : LinearOperator::identity(y.height(), y.width());
        problem.likelihood.emplace(std::move(op), y.values(), cfg.sigma);
        break;
    }
    case Task::Inpaint: {
        if (cfg.observation.empty() || cfg.mask_path.empty())
            throw ConfigError("inpainting needs observation and mask files");
        LinearOperator mask = read_mask_file(cfg.mask_path);
        const ImageField y = read_field_raw(cfg.observation);
        problem.height = mask.image_height();
        problem.width = mask.image_width();
        problem.observation = y.values();
        problem.mask.emplace(std::move(mask));
        break;
    }
    case Task::PriorOnly: {
        if (!truth)
            throw ConfigError("prior-only runs take their shape from task.input");
        problem.height = truth->height();
        problem.width = truth->width();
        break;
    }
    }

    auto den = build_denoiser(cfg);
    if (auto* ext = dynamic_cast<const ExternalDenoiser*>(den.get())) {
        const_cast<ExternalDenoiser*>(ext)->set_shape(
            static_cast<std::uint32_t>(problem.height),
            static_cast<std::uint32_t>(problem.width));
    }
    problem.denoiser = std::move(den);
    problem.ground_truth = std::move(truth);
    problem.check();
    return problem;
}

SamplerConfig resolve_sampler(const ExperimentConfig& cfg, const ProblemSpec& problem,
                              ValidationReport* report) {
    SamplerConfig sc;
    sc.alpha = cfg.alpha;
    sc.epsilon = cfg.epsilon;
    sc.c_lo = cfg.c_lo;
    sc.c_hi = cfg.c_hi;
    sc.n_iter = cfg.n_iter;
    sc.burn_in = cfg.burn_in;
    sc.thinning = cfg.thinning;
    sc.seed = cfg.seed;
    sc.strict = cfg.strict;
    sc.variant = parse_variant(cfg.variant);

    const bool inpainting = problem.task == Task::Inpaint;
    const double l = problem.denoiser->residual_lipschitz(sc.epsilon);
    const double l_y =
        (problem.likelihood && !inpainting) ? problem.likelihood->lipschitz() : 0.0;
    const double m =
        (problem.likelihood && !inpainting) ? problem.likelihood->one_sided_m() : 0.0;

    const double prior_lip = sc.alpha * l / sc.epsilon;
    const double denom = 2.0 * l_y + prior_lip;
    const double lambda_max = denom > 0.0 ? 1.0 / (2.0 * denom) : 1.0;
    sc.lambda = cfg.lambda ? *cfg.lambda : lambda_max;

    const double lip = prior_lip + 1.0 / sc.lambda + (inpainting ? 0.0 : l_y);
    // "auto" sits just under the threshold: the bound itself is open (delta
    // strictly below), so the resolved value backs off by 0.1%.
    sc.delta = cfg.delta ? *cfg.delta : 0.999 * (1.0 / 3.0) / lip;

    const ValidationReport r = validate_config(sc, l, l_y, m, inpainting);
    if (report != nullptr) *report = r;
    return sc;
}

void cmd_degrade(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.input.empty()) throw ConfigError("degrade needs task.input");
    const ImageField x = load_image(cfg.input);
    const Task task = parse_task(cfg.task);
    if (task == Task::PriorOnly)
        throw ConfigError("prior-only has no observation to generate");
    if (!(cfg.sigma >= 0.0)) throw ConfigError("degradation sigma must be nonnegative");

    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    LinearOperator op = LinearOperator::identity(x.height(), x.width());
    switch (task) {
    case Task::Deblur:
        op = LinearOperator::box_blur(cfg.blur_size, x.height(), x.width());
        break;
    case Task::Inpaint:
        op = LinearOperator::random_mask(x.height(), x.width(), cfg.hidden_fraction,
                                         cfg.degrade_seed);
        break;
    default:
        break;
    }

    std::vector<double> y(op.output_size());
    op.apply(x.span(), y);
    if (cfg.sigma > 0.0) {
        GaussianStream noise(cfg.degrade_seed);
        std::vector<double> z(y.size());
        noise.fill(z);
        kernels::axpy(cfg.sigma, z, y);
    }

    const fs::path obs_path = dir / "observation.raw";
    if (task == Task::Inpaint) {
        write_field_raw(ImageField(1, y.size(), y), obs_path.string());
        write_mask_file((dir / "mask.txt").string(), x.height(), x.width(),
                        op.kept_indices());
        if (cfg.write_pgm) {
            // Preview embeds the kept pixels into a zero background.
            std::vector<double> full(x.size(), 0.0);
            op.adjoint(y, full);
            write_field_pgm(ImageField(x.height(), x.width(), full),
                            (dir / "observation.pgm").string());
        }
    } else {
        write_field_raw(ImageField(x.height(), x.width(), y), obs_path.string());
        if (cfg.write_pgm)
            write_field_pgm(ImageField(x.height(), x.width(), y),
                            (dir / "observation.pgm").string());
    }

    std::ofstream rec(dir / "degradation.txt");
    rec << "task = " << cfg.task << "\n";
    rec << "input = " << cfg.input << "\n";
    rec << "height = " << x.height() << " pixels\n";
    rec << "width = " << x.width() << " pixels\n";
    if (task == Task::Deblur) rec << "blur_size = " << cfg.blur_size << " pixels\n";
    if (task == Task::Inpaint) {
        rec << "hidden_fraction = " << fmt(cfg.hidden_fraction) << "\n";
        rec << "kept_pixels = " << op.kept_indices().size() << "\n";
    }
    rec << "sigma = " << fmt(cfg.sigma) << " (intensity units)\n";
    rec << "seed = " << cfg.degrade_seed << "\n";
    rec << "observation = " << obs_path.string() << "\n";
    if (!rec) throw TransportError("failed writing degradation record");

    log << "wrote " << obs_path.string() << " (" << y.size() << " values)\n";
}

namespace {

// Per-chain bundle of observers; only chain 0 carries the trace machinery.
struct ChainRun {
    std::unique_ptr<MomentObserver> moments;
    std::unique_ptr<FourierMomentObserver> fourier;
    std::unique_ptr<MultiscaleMomentObserver> multiscale;
    std::unique_ptr<PsnrTraceObserver> psnr_trace;
    std::unique_ptr<SelectedCoordinateObserver> selected;
    std::vector<std::vector<double>> sample_buffer;
    RunSummary summary;
    ChainState final_state;
};

// Stores delivered samples for the post-hoc distance-to-final-estimate trace;
// disabled above a memory cap.
class BufferObserver : public ChainObserver {
public:
    BufferObserver(std::vector<std::vector<double>>& buf, std::vector<std::uint64_t>& ks)
        : buf_(buf), ks_(ks) {}
    void observe(std::uint64_t k, std::span<const double> sample) override {
        buf_.emplace_back(sample.begin(), sample.end());
        ks_.push_back(k);
    }

private:
    std::vector<std::vector<double>>& buf_;
    std::vector<std::uint64_t>& ks_;
};

} // namespace

void cmd_sample(const ExperimentConfig& cfg, std::ostream& log) {
    const auto wall0 = std::chrono::steady_clock::now();
    const ProblemSpec probe = build_problem(cfg); // validates config + inputs once
    ValidationReport report;
    const SamplerConfig sc = resolve_sampler(cfg, probe, &report);

    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    save_config((dir / "config.txt").string(), cfg);

    const std::size_t hw = probe.image_size();
    const std::size_t h = probe.height, w = probe.width;

    if (cfg.n_chains == 0) throw ConfigError("n_chains must be at least 1");
    if (!cfg.resume_from.empty() && cfg.n_chains != 1)
        throw ConfigError("resume supports a single chain only");

    // Expected sample count decides whether the distance trace can buffer.
    const std::uint64_t expected =
        cfg.n_iter > cfg.burn_in
            ? (cfg.n_iter - cfg.burn_in + cfg.thinning - 1) / cfg.thinning
            : 0;
    constexpr std::uint64_t kBufferDoubleCap = 1ull << 23; // 64 MB of samples
    const bool buffer_samples = expected * hw <= kBufferDoubleCap;

    std::vector<ChainRun> runs(cfg.n_chains);
    std::vector<std::uint64_t> buffer_ks;
    std::vector<std::exception_ptr> failures(cfg.n_chains);

    auto run_one = [&](std::size_t chain) {
        try {
            ChainRun& r = runs[chain];
            // Each chain owns a full problem (likelihood scratch buffers and
            // external denoiser subprocesses are not shareable across threads).
            const ProblemSpec problem = build_problem(cfg);
            SamplerConfig chain_cfg = sc;
            chain_cfg.seed = sc.seed + chain;

            std::vector<ChainObserver*> observers;
            r.moments = std::make_unique<MomentObserver>(hw, cfg.std_snapshots && chain == 0);
            observers.push_back(r.moments.get());
            if (cfg.fourier) {
                r.fourier = std::make_unique<FourierMomentObserver>(h, w);
                observers.push_back(r.fourier.get());
            }
            if (cfg.multiscale) {
                r.multiscale = std::make_unique<MultiscaleMomentObserver>(
                    h, w, static_cast<unsigned>(cfg.multiscale_i_max));
                observers.push_back(r.multiscale.get());
            }
            std::unique_ptr<BufferObserver> buffer;
            if (chain == 0) {
                if (cfg.psnr_trace && problem.ground_truth) {
                    r.psnr_trace = std::make_unique<PsnrTraceObserver>(
                        problem.ground_truth->values(), 1.0, cfg.trace_stride);
                    observers.push_back(r.psnr_trace.get());
                }
                r.selected =
                    std::make_unique<SelectedCoordinateObserver>(hw, cfg.select_warmup);
                observers.push_back(r.selected.get());
                if (buffer_samples) {
                    buffer = std::make_unique<BufferObserver>(r.sample_buffer, buffer_ks);
                    observers.push_back(buffer.get());
                }
            }

            ChainState state;
            if (chain == 0 && !cfg.resume_from.empty()) {
                Checkpoint ck = load_checkpoint(cfg.resume_from);
                if (ck.config_hash != trajectory_hash(cfg))
                    throw ConfigError("checkpoint belongs to a different config (hash " +
                                      ck.config_hash + ")");
                state = std::move(ck.state);
            }
            r.summary = run_chain(problem, chain_cfg, observers, std::nullopt, &state);
            r.final_state = std::move(state);
        } catch (...) {
            failures[chain] = std::current_exception();
        }
    };

    if (cfg.n_chains == 1) {
        run_one(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(cfg.n_chains);
        for (std::size_t c = 0; c < cfg.n_chains; ++c) threads.emplace_back(run_one, c);
        for (auto& t : threads) t.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    // Merge chain accumulators into chain 0's (fixed order keeps reruns
    // byte-identical).
    for (std::size_t c = 1; c < cfg.n_chains; ++c) {
        runs[0].moments->moments().merge(runs[c].moments->moments());
    }
    RunSummary& summary = runs[0].summary;
    for (std::size_t c = 1; c < cfg.n_chains; ++c) {
        summary.samples_delivered += runs[c].summary.samples_delivered;
        summary.partial = summary.partial || runs[c].summary.partial;
        for (const auto& w_msg : runs[c].summary.warnings)
            summary.warnings.push_back("chain " + std::to_string(c) + ": " + w_msg);
    }

    const RunningMoments& pixel_moments = runs[0].moments->moments();
    if (pixel_moments.count() < 2)
        throw ConfigError("run delivered fewer than 2 samples; raise n_iter or lower burn_in");

    const ImageField mmse = mean_map(pixel_moments, h, w);
    const ImageField std_field = std_map(pixel_moments, h, w);
    write_field_raw(mmse, (dir / "mmse.raw").string());
    write_field_raw(std_field, (dir / "std.raw").string());
    if (cfg.write_pgm) {
        write_field_pgm(mmse, (dir / "mmse.pgm").string());
        write_preview_scaled(std_field, (dir / "std.pgm").string());
    }

    if (cfg.fourier) {
        RunningMoments re = runs[0].fourier->real_moments();
        RunningMoments im = runs[0].fourier->imag_moments();
        for (std::size_t c = 1; c < cfg.n_chains; ++c) {
            re.merge(runs[c].fourier->real_moments());
            im.merge(runs[c].fourier->imag_moments());
        }
        std::vector<double> vr = re.variance();
        const std::vector<double> vi = im.variance();
        for (std::size_t i = 0; i < vr.size(); ++i) vr[i] = std::sqrt(vr[i] + vi[i]);
        const ImageField fstd(h, w, vr);
        write_field_raw(fstd, (dir / "fourier_std.raw").string());
        if (cfg.write_pgm) write_preview_scaled(fstd, (dir / "fourier_std.pgm").string());
    }

    if (cfg.multiscale) {
        for (unsigned i = 0; i <= runs[0].multiscale->max_scale(); ++i) {
            RunningMoments m = runs[0].multiscale->scale(i);
            for (std::size_t c = 1; c < cfg.n_chains; ++c)
                m.merge(runs[c].multiscale->scale(i));
            const ImageField map = std_map(m, h >> i, w >> i);
            write_field_raw(map,
                            (dir / ("multiscale_std_" + std::to_string(i) + ".raw")).string());
        }
    }

    std::vector<std::string> skipped;
    if (buffer_samples && !runs[0].sample_buffer.empty()) {
        ScalarTrace l2;
        l2.name = "l2_to_final_mmse";
        for (std::size_t s = 0; s < runs[0].sample_buffer.size(); ++s) {
            double acc = 0.0;
            const auto& sample = runs[0].sample_buffer[s];
            for (std::size_t i = 0; i < sample.size(); ++i) {
                const double d = sample[i] - mmse[i];
                acc += d * d;
            }
            l2.append(buffer_ks[s], std::sqrt(acc));
        }
        write_traces_csv((dir / "trace_l2.csv").string(), {l2});
    } else if (!buffer_samples) {
        skipped.push_back("trace_l2.csv (sample buffer would exceed the memory cap)");
    }

    if (runs[0].psnr_trace && runs[0].psnr_trace->trace().size() > 0)
        write_traces_csv((dir / "trace_psnr.csv").string(), {runs[0].psnr_trace->trace()});

    if (runs[0].selected && runs[0].selected->selected()) {
        const auto& traces = runs[0].selected->traces();
        write_traces_csv((dir / "trace_selected.csv").string(), traces);
        const std::size_t len = traces[0].size();
        if (len >= cfg.acf_max_lag + 2 && cfg.acf_max_lag > 0) {
            std::ofstream acf_out(dir / "acf.csv");
            acf_out << "lag";
            for (const auto& t : traces) acf_out << "," << t.name;
            acf_out << "\n";
            std::vector<std::vector<double>> rs;
            for (const auto& t : traces) rs.push_back(acf(t.values, cfg.acf_max_lag));
            for (std::size_t lag = 0; lag <= cfg.acf_max_lag; ++lag) {
                acf_out << lag;
                for (const auto& r : rs) acf_out << "," << fmt(r[lag]);
                acf_out << "\n";
            }
        } else {
            skipped.push_back("acf.csv (not enough post-selection samples for max_lag " +
                              std::to_string(cfg.acf_max_lag) + ")");
        }
    } else {
        skipped.push_back("trace_selected.csv (selection warm-up never completed)");
    }

    if (cfg.std_snapshots && !runs[0].moments->snapshots().empty()) {
        write_traces_csv((dir / "rmse_std.csv").string(),
                         {rmse_std_trace(runs[0].moments->snapshots(),
                                         std_field.values())});
    }

    if (cfg.write_checkpoint) {
        Checkpoint ck;
        ck.state = std::move(runs[0].final_state);
        ck.seed = sc.seed;
        ck.config_hash = trajectory_hash(cfg);
        save_checkpoint((dir / "checkpoint").string(), ck);
    }

    const auto wall1 = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(wall1 - wall0).count();

    std::ofstream rep(dir / "report.txt");
    rep << "task = " << cfg.task << " (" << h << "x" << w << " pixels)\n";
    rep << "denoiser = " << probe.denoiser->describe() << "\n";
    rep << "variant = " << cfg.variant << "\n";
    rep << "chains = " << cfg.n_chains << "\n";
    rep << "\n";
    rep << "L (denoiser residual Lipschitz) = " << fmt(report.l) << "\n";
    rep << "L_y (likelihood gradient Lipschitz) = " << fmt(report.l_y) << "\n";
    rep << "m (likelihood one-sided constant) = " << fmt(report.m) << "\n";
    rep << "lambda_max = " << fmt(report.lambda_max) << "\n";
    rep << "lambda = " << fmt(sc.lambda) << (cfg.lambda ? "" : " (auto)") << "\n";
    rep << "Lip(drift) = " << fmt(report.lip_drift) << "\n";
    rep << "delta_th = " << fmt(report.delta_th) << "\n";
    rep << "delta = " << fmt(sc.delta) << (cfg.delta ? "" : " (auto)") << "\n";
    if (report.m > 0.0) rep << "delta_strong = " << fmt(report.delta_strong) << "\n";
    rep << "ppnp_delta_max = " << fmt(report.ppnp_delta_max) << "\n";
    rep << "\n";
    rep << "iterations = " << summary.iterations << " (per chain)\n";
    rep << "samples = " << summary.samples_delivered << " (all chains)\n";
    rep << "throughput = " << fmt(summary.steps_per_sec) << " iterations/second (chain 0)\n";
    rep << "wall_time = " << fmt(wall) << " seconds\n";
    if (summary.partial) rep << "partial = true (an observer aborted the run)\n";

    if (probe.ground_truth) {
        const ImageField& truth = *probe.ground_truth;
        std::vector<double> baseline;
        if (probe.task == Task::Inpaint) {
            baseline.assign(hw, 0.0);
            const std::vector<double> zeros(probe.mask->hidden_indices().size(), 0.0);
            embed_inpainting(zeros, probe, baseline);
        } else if (probe.likelihood) {
            baseline = probe.likelihood->observation();
        }
        rep << "\n";
        if (!baseline.empty())
            rep << "psnr_observation = " << fmt(psnr(baseline, truth.values(), 1.0))
                << " dB\n";
        rep << "psnr_mmse = " << fmt(psnr(mmse.values(), truth.values(), 1.0)) << " dB\n";
        rep << "ssim_mmse = " << fmt(ssim(mmse, truth)) << "\n";
    }

    if (!skipped.empty()) {
        rep << "\n";
        for (const auto& s : skipped) rep << "skipped: " << s << "\n";
    }
    if (!summary.warnings.empty()) {
        rep << "\n";
        for (const auto& w_msg : summary.warnings) rep << "warning: " << w_msg << "\n";
    }
    if (!rep) throw TransportError("failed writing report.txt");

    log << "sampled " << summary.samples_delivered << " states into " << cfg.output_dir
        << " (" << fmt(wall) << " s)\n";
}

void cmd_info(const ExperimentConfig& cfg, std::ostream& log) {
    const ProblemSpec problem = build_problem(cfg);
    ValidationReport report;
    const SamplerConfig sc = resolve_sampler(cfg, problem, &report);

    log << "task = " << cfg.task << " (" << problem.height << "x" << problem.width
        << " pixels)\n";
    log << "denoiser = " << problem.denoiser->describe() << "\n";
    log << "chain dimension = " << problem.chain_dim() << "\n";
    log << "L = " << fmt(report.l) << ", L_y = " << fmt(report.l_y)
        << ", m = " << fmt(report.m) << "\n";
    log << "lambda = " << fmt(sc.lambda) << (cfg.lambda ? "" : " (auto)")
        << ", lambda_max = " << fmt(report.lambda_max) << "\n";
    log << "delta = " << fmt(sc.delta) << (cfg.delta ? "" : " (auto)")
        << ", delta_th = " << fmt(report.delta_th) << "\n";
    log << "Lip(drift) = " << fmt(report.lip_drift) << "\n";
    if (report.m > 0.0) log << "delta_strong = " << fmt(report.delta_strong) << "\n";
    log << "ppnp_delta_max = " << fmt(report.ppnp_delta_max) << "\n";
    log << "validation = " << (report.pass() ? "pass" : "FAIL") << "\n";
}

} // namespace pnp
