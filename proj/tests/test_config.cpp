#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pnp/checkpoint.hpp"
#include "pnp/config.hpp"
#include "pnp/errors.hpp"
#include "pnp/field.hpp"
#include "pnp/image_io.hpp"
#include "pnp/rng.hpp"

using namespace pnp;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string(PNP_CLI_PATH) + " " + args + " >> " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("config: serialization is a fixed point of parsing") {
    ExperimentConfig cfg;
    cfg.task = "inpaint";
    cfg.input = "truth.raw";
    cfg.delta = 1.0 / 3.0; // many digits, exercises the %.17g round trip
    cfg.lambda = 2.5e-4;
    cfg.epsilon = 0.123456789012345678;
    cfg.n_iter = 123456789;
    cfg.strict = false;
    cfg.gmm_means = "0.2, 0.8";

    const std::string text = serialize_config(cfg);
    const ExperimentConfig back = parse_config(text, "<string>");
    CHECK(serialize_config(back) == text);
    CHECK(back.delta.has_value());
    CHECK(*back.delta == *cfg.delta); // bitwise, not approximate
    CHECK(back.epsilon == cfg.epsilon);
    CHECK(back.n_iter == cfg.n_iter);
    CHECK(back.strict == false);
}

TEST_CASE("config: auto-valued keys survive both directions") {
    ExperimentConfig cfg; // delta and lambda default to auto
    const std::string text = serialize_config(cfg);
    CHECK(text.find("delta = auto") != std::string::npos);
    CHECK(text.find("lambda = auto") != std::string::npos);

    const ExperimentConfig back = parse_config(text, "<string>");
    CHECK_FALSE(back.delta.has_value());
    CHECK_FALSE(back.lambda.has_value());

    const ExperimentConfig set =
        parse_config("[sampler]\ndelta = 0.25\n", "<string>");
    CHECK(set.delta.has_value());
    CHECK(*set.delta == 0.25);
}

TEST_CASE("config: parse errors carry origin and line number") {
    CHECK_THROWS_WITH_AS(parse_config("[sampler]\nbogus = 1\n", "cfg.txt"),
                         doctest::Contains("cfg.txt:2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[nosuch]\n", "cfg.txt"),
                         doctest::Contains("unknown section"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[sampler]\njust words\n", "cfg.txt"),
                         doctest::Contains("expected 'key = value'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("delta = 1\n", "cfg.txt"),
                         doctest::Contains("before any [section]"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sampler]\ndelta = banana\n", "cfg.txt"),
                    ConfigError);

    // Comments and blank lines are fine anywhere.
    CHECK_NOTHROW(parse_config("# header\n\n[sampler]\n# note\nseed = 3\n", "x"));
}

TEST_CASE("config: command-line overrides") {
    ExperimentConfig cfg;
    apply_override(cfg, "sampler.delta=1e-6");
    CHECK(cfg.delta.has_value());
    CHECK(*cfg.delta == 1e-6);
    apply_override(cfg, "task.kind=denoise");
    CHECK(cfg.task == "denoise");
    apply_override(cfg, "sampler.delta=auto");
    CHECK_FALSE(cfg.delta.has_value());

    CHECK_THROWS_AS(apply_override(cfg, "nodots=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "sampler.delta"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "sampler.bogus=1"), ConfigError);
}

TEST_CASE("config: hash is stable and sensitive") {
    ExperimentConfig a, b;
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) == config_hash(b));
    b.seed += 1;
    CHECK(config_hash(a) != config_hash(b));
    b.seed = a.seed;
    b.denoiser = "identity";
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config: double lists") {
    CHECK(parse_double_list("0.3,0.7") == std::vector<double>{0.3, 0.7});
    CHECK(parse_double_list(" 1 , -2e3 ") == std::vector<double>{1.0, -2000.0});
    CHECK(parse_double_list("5") == std::vector<double>{5.0});
    CHECK_THROWS_AS(parse_double_list("1,,2"), ConfigError);
    CHECK_THROWS_AS(parse_double_list(""), ConfigError);
    CHECK_THROWS_AS(parse_double_list("1,two"), ConfigError);
}

TEST_CASE("checkpoint: snapshot round-trips exactly") {
    const auto path = (fs::temp_directory_path() / "pnp_ckpt_test").string();

    Checkpoint c;
    c.state.x = {0.25, -1.5, 1e-300};
    c.state.k = 123456;
    c.state.rng = GaussianStream(7);
    c.state.rng.next(); // leave the stream mid-sequence (spare cached)
    c.seed = 7;
    c.config_hash = "0123456789abcdef";
    save_checkpoint(path, c);

    const Checkpoint back = load_checkpoint(path);
    CHECK(back.state.x == c.state.x);
    CHECK(back.state.k == c.state.k);
    CHECK(back.seed == c.seed);
    CHECK(back.config_hash == c.config_hash);
    CHECK(back.state.rng == c.state.rng);

    // A corrupt sidecar and a missing payload both fail loudly.
    std::ofstream(path + ".meta") << "k = 12\n";
    CHECK_THROWS_AS(load_checkpoint(path), TransportError);
    fs::remove(path);
    fs::remove(path + ".meta");
    CHECK_THROWS_AS(load_checkpoint(path), TransportError);
}

TEST_CASE("cli: the degrade/sample/info pipeline runs end to end") {
    const fs::path dir = fs::temp_directory_path() / "pnp_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path log = dir / "cli.log";
    const fs::path out = dir / "out";

    // A small smooth truth image keeps the run fast.
    ImageField truth(8, 8);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c)
            truth.at(r, c) = 0.2 + 0.6 * static_cast<double>(r + c) / 14.0;
    write_field_raw(truth, (dir / "truth.raw").string());

    ExperimentConfig cfg;
    cfg.task = "deblur";
    cfg.input = (dir / "truth.raw").string();
    cfg.output_dir = out.string();
    cfg.blur_size = 3;
    cfg.sigma = 0.02;
    cfg.degrade_seed = 5;
    cfg.denoiser = "gaussian";
    cfg.prior_mean = 0.5;
    cfg.prior_var = 0.25;
    cfg.n_iter = 30;
    cfg.burn_in = 10;
    cfg.thinning = 2;
    cfg.seed = 7;
    const fs::path cfg_path = dir / "exp.cfg";
    save_config(cfg_path.string(), cfg);

    CHECK(run_cli("degrade -c " + cfg_path.string(), log) == 0);
    const std::string obs = (out / "observation.raw").string();
    CHECK(fs::exists(obs));
    CHECK(fs::exists(out / "degradation.txt"));

    const std::string obs_arg = " -s task.observation=" + obs;
    CHECK(run_cli("sample -c " + cfg_path.string() + obs_arg, log) == 0);
    for (const char* artifact : {"mmse.raw", "std.raw", "mmse.pgm", "report.txt",
                                 "config.txt", "checkpoint", "checkpoint.meta"}) {
        CHECK(fs::exists(out / artifact));
    }

    CHECK(run_cli("info -c " + cfg_path.string() + obs_arg, log) == 0);

    // Resume from the checkpoint with an extended horizon.
    CHECK(run_cli("sample -c " + cfg_path.string() + obs_arg +
                      " -s output.resume_from=" + (out / "checkpoint").string() +
                      " -s sampler.n_iter=50",
                  log) == 0);

    // Exit code 1 for configuration mistakes.
    std::ofstream(dir / "bad.cfg") << "[sampler]\nbogus = 1\n";
    CHECK(run_cli("sample -c " + (dir / "bad.cfg").string(), log) == 1);
    CHECK(run_cli("sample -c " + (dir / "missing.cfg").string(), log) == 1);

    fs::remove_all(dir);
}

TEST_CASE("cli: verification plumbing") {
    const fs::path dir = fs::temp_directory_path() / "pnp_cli_verify";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path log = dir / "cli.log";

    CHECK(run_cli("verify --list", log) == 0);
    CHECK(run_cli("verify param-rules", log) == 0);
    CHECK(run_cli("verify no-such-criterion", log) == 1);

    fs::remove_all(dir);
}
