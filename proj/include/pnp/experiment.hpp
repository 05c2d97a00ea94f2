#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "pnp/config.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/sampler.hpp"

namespace pnp {

// Wiring between a parsed ExperimentConfig and the library types. Exposed
// separately from the commands so tests can assemble the same pieces.
std::shared_ptr<const Denoiser> build_denoiser(const ExperimentConfig& cfg);
ProblemSpec build_problem(const ExperimentConfig& cfg);

// Fills in the "auto" sampler parameters from the problem's constants:
// lambda <- lambda_max, then delta <- 0.999 * delta_th at that lambda.
// The report describes the resolved configuration.
SamplerConfig resolve_sampler(const ExperimentConfig& cfg, const ProblemSpec& problem,
                              ValidationReport* report = nullptr);

// Inpainting observed-pixel list: one line "height width", then one kept
// (observed) flat index per line.
void write_mask_file(const std::string& path, std::size_t h, std::size_t w,
                     const std::vector<std::size_t>& kept);
LinearOperator read_mask_file(const std::string& path);

// Loads .pgm by extension, raw field otherwise.
ImageField load_image(const std::string& path);

// The CLI commands. All paths come from cfg; human-readable progress goes to
// `log`. Failures throw (the CLI maps exception families to exit codes).
void cmd_degrade(const ExperimentConfig& cfg, std::ostream& log);
void cmd_sample(const ExperimentConfig& cfg, std::ostream& log);
void cmd_info(const ExperimentConfig& cfg, std::ostream& log);

} // namespace pnp
