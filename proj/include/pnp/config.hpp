#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pnp {

// Flat key=value experiment description with [section] headers and #-comment
// lines. Every key has a default; serialization writes the full set in a
// fixed order, so serialize(parse(serialize(c))) == serialize(c) and configs
// diff cleanly. Unknown keys are rejected with file:line context.
struct ExperimentConfig {
    // [task]
    std::string task = "deblur"; // deblur | denoise | inpaint | prior-only
    std::string input;           // clean image (raw field or PGM)
    std::string observation;     // degraded observation (raw field)
    std::string mask_path;       // kept-index list for inpainting
    std::string output_dir = "out";

    // [degradation]
    std::uint64_t blur_size = 9;
    double sigma = 1.0 / 255.0;
    double hidden_fraction = 0.8;
    std::uint64_t degrade_seed = 1234;

    // [denoiser]
    std::string denoiser = "gaussian"; // identity | gaussian | gmm | gmm-pixel | external
    double prior_mean = 0.5;
    double prior_var = 0.25;
    std::string gmm_means = "0,1";     // comma list (component means / pixel levels)
    std::string gmm_weights = "0.5,0.5";
    double gmm_var = 0.01;
    std::optional<double> declared_l;  // residual-Lipschitz override ("auto" derives)
    std::string external_command;      // argv for the external denoiser, space-split

    // [sampler]
    std::string variant = "pnp-ula"; // pnp-ula | ppnp-ula
    std::optional<double> delta;     // "auto": 0.999 * delta_th from validation
    std::optional<double> lambda;    // "auto": lambda_max from validation
    double alpha = 1.0;
    double epsilon = 25.0 / (255.0 * 255.0); // (5/255)^2
    double c_lo = -1.0;
    double c_hi = 2.0;
    std::uint64_t n_iter = 10000;
    std::uint64_t burn_in = 1000;
    std::uint64_t thinning = 1;
    std::uint64_t seed = 42;
    std::uint64_t n_chains = 1;
    bool strict = true;

    // [diagnostics]
    bool std_maps = true;
    bool fourier = false;
    bool multiscale = false;
    std::uint64_t multiscale_i_max = 2;
    std::uint64_t acf_max_lag = 100;
    std::uint64_t trace_stride = 1;
    std::uint64_t select_warmup = 100;
    bool psnr_trace = false;
    bool std_snapshots = false;

    // [output]
    bool write_pgm = true;
    bool write_checkpoint = true;
    std::string resume_from; // checkpoint path; empty = fresh start
};

std::string serialize_config(const ExperimentConfig& cfg);
// `origin` names the source in error messages (file path or "<string>").
ExperimentConfig parse_config(const std::string& text, const std::string& origin);
// Applies one "section.key=value" assignment (command-line override form).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);
ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& cfg);

// FNV-1a over the canonical serialization; pins checkpoints to their config.
std::string config_hash(const ExperimentConfig& cfg);

// "0.3,0.7" -> {0.3, 0.7}; used by the list-valued denoiser keys.
std::vector<double> parse_double_list(const std::string& text);

} // namespace pnp
