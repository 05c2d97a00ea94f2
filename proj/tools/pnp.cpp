#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pnp/config.hpp"
#include "pnp/errors.hpp"
#include "pnp/experiment.hpp"
#include "pnp/verify.hpp"

namespace {

// Exit codes: 0 success, 1 configuration/validation, 2 runtime (I/O, numeric),
// 3 verification criteria failed.
constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kRuntime = 2;
constexpr int kVerification = 3;

pnp::ExperimentConfig resolve_config(const std::string& path,
                                     const std::vector<std::string>& overrides) {
    pnp::ExperimentConfig cfg;
    if (!path.empty()) cfg = pnp::load_config(path);
    for (const std::string& o : overrides) pnp::apply_override(cfg, o);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Posterior sampling for imaging inverse problems with learned priors"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "experiment config file");
        sub->add_option("-s,--set", overrides,
                        "override a config key, e.g. -s sampler.delta=1e-6");
    };

    CLI::App* degrade =
        app.add_subcommand("degrade", "generate an observation from a clean image");
    CLI::App* sample =
        app.add_subcommand("sample", "run the chain(s) and write posterior summaries");
    CLI::App* info =
        app.add_subcommand("info", "print resolved constants and admissibility checks");
    add_common(degrade);
    add_common(sample);
    add_common(info);

    CLI::App* verify =
        app.add_subcommand("verify", "run the statistical verification criteria");
    std::vector<std::string> criteria;
    bool list_criteria = false;
    verify->add_option("criteria", criteria, "criterion names (default: all)");
    verify->add_flag("--list", list_criteria, "list available criteria and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            if (list_criteria) {
                for (const pnp::Criterion& c : pnp::verification_criteria())
                    std::cout << c.name << ": " << c.what << "\n";
                return kOk;
            }
            return pnp::run_verification(criteria, std::cout) == 0 ? kOk : kVerification;
        }
        const pnp::ExperimentConfig cfg = resolve_config(config_path, overrides);
        if (degrade->parsed()) {
            pnp::cmd_degrade(cfg, std::cout);
        } else if (sample->parsed()) {
            pnp::cmd_sample(cfg, std::cout);
        } else {
            pnp::cmd_info(cfg, std::cout);
        }
        return kOk;
    } catch (const pnp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const pnp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}
