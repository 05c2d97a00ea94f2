#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pnp/diagnostics.hpp"
#include "pnp/errors.hpp"
#include "pnp/field.hpp"
#include "pnp/rng.hpp"

using namespace pnp;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("moments: streaming matches the two-pass formulas") {
    RunningMoments m(2);
    const std::vector<std::vector<double>> xs = {{1.0, -3.0}, {2.0, 5.0}, {6.0, 1.0}};
    for (const auto& x : xs) m.add(x);

    CHECK(m.count() == 3);
    CHECK(m.mean()[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(m.mean()[1] == doctest::Approx(1.0).epsilon(1e-15));
    // Two-pass: sum of squared deviations / (n-1).
    CHECK(m.variance()[0] == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(m.variance()[1] == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(m.std_dev()[1] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("moments: error paths") {
    RunningMoments m(2);
    CHECK_THROWS_AS(m.variance(), NumericError);
    m.add(std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(m.variance(), NumericError); // still only one sample
    CHECK_THROWS_AS(m.add(std::vector<double>{1.0}), DimensionError);

    RunningMoments other_tag(2, "fourier-real");
    CHECK_THROWS_AS(m.merge(other_tag), ConfigError);
    RunningMoments other_dim(3);
    CHECK_THROWS_AS(m.merge(other_dim), DimensionError);
}

TEST_CASE("moments: merging chains equals one long chain") {
    GaussianStream stream(77);
    std::vector<std::vector<double>> xs(60, std::vector<double>(5));
    for (auto& x : xs) stream.fill(x);

    RunningMoments whole(5);
    for (const auto& x : xs) whole.add(x);

    RunningMoments a(5), b(5), c(5);
    for (std::size_t i = 0; i < 10; ++i) a.add(xs[i]);
    for (std::size_t i = 10; i < 25; ++i) b.add(xs[i]);
    for (std::size_t i = 25; i < 60; ++i) c.add(xs[i]);
    a.merge(b);
    a.merge(c);

    CHECK(a.count() == 60);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.mean()[i] == doctest::Approx(whole.mean()[i]).epsilon(1e-13));
        CHECK(a.variance()[i] == doctest::Approx(whole.variance()[i]).epsilon(1e-12));
    }

    // Merging into an empty accumulator copies the other side bit for bit.
    RunningMoments empty(5);
    empty.merge(whole);
    CHECK(empty.mean() == whole.mean());
    CHECK(empty.m2() == whole.m2());
}

TEST_CASE("acf: alternating trace has exact lag-1 value") {
    const std::vector<double> alt = {1.0, -1.0, 1.0, -1.0};
    const auto r = acf(alt, 1);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == -0.75); // 3 products of -1 over a denominator of 4

    CHECK_THROWS_AS(acf(std::vector<double>{1.0, 2.0}, 1), NumericError);
    CHECK_THROWS_AS(acf(std::vector<double>(10, 3.0), 2), NumericError);
}

TEST_CASE("psnr: known values and guards") {
    const std::vector<double> zeros(8, 0.0);
    const std::vector<double> tenth(8, 0.1);
    CHECK(std::isinf(psnr(zeros, zeros, 1.0)));
    CHECK(psnr(tenth, zeros, 1.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(psnr(tenth, std::vector<double>(7, 0.0), 1.0), DimensionError);
    CHECK_THROWS_AS(psnr(tenth, zeros, 0.0), ConfigError);
}

TEST_CASE("ssim: perfect match and the constant-image closed form") {
    GaussianStream stream(3);
    ImageField img(16, 16);
    stream.fill(img.span());
    CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));

    // 4x4 is below the window size, so one global window with population
    // statistics: means 0.3/0.5, zero variances and covariance.
    const ImageField a(4, 4, 0.3);
    const ImageField b(4, 4, 0.5);
    const double c1 = 1e-4;
    const double want = (2.0 * 0.3 * 0.5 + c1) / (0.09 + 0.25 + c1);
    CHECK(ssim(a, b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("selection: extremes and median with deterministic tie-breaks") {
    RunningMoments m(4);
    m.add(std::vector<double>{1.0, 0.0, 5.0, 0.0});
    m.add(std::vector<double>{1.0, 2.0, 7.0, 4.0});
    // variances: {0, 2, 2, 8}
    const auto sel = select_statistics(m);
    CHECK(sel.argmin == 0);
    CHECK(sel.median == 1); // tied value 2; lower index wins
    CHECK(sel.argmax == 3);
}

TEST_CASE("trace: iteration indices must strictly increase") {
    ScalarTrace t;
    t.name = "x";
    t.append(5, 1.0);
    CHECK_THROWS_AS(t.append(5, 2.0), NumericError);
    CHECK_THROWS_AS(t.append(4, 2.0), NumericError);
    t.append(6, 2.0);
    CHECK(t.size() == 2);
}

TEST_CASE("trace: csv writer pads ragged columns") {
    ScalarTrace a, b;
    a.name = "long";
    b.name = "short";
    a.append(1, 0.5);
    a.append(2, 1.5);
    a.append(3, 2.5);
    b.append(1, -1.0);

    const auto path = std::filesystem::temp_directory_path() / "pnp_traces_test.csv";
    write_traces_csv(path.string(), {a, b});
    const std::string text = slurp(path);
    std::filesystem::remove(path);

    CHECK(text == "iteration,long,short\n"
                  "1,0.5,-1\n"
                  "2,1.5,\n"
                  "3,2.5,\n");
}

TEST_CASE("observers: moment observer snapshots at doublings") {
    MomentObserver obs(2, true);
    GaussianStream stream(8);
    std::vector<double> x(2);
    for (int i = 0; i < 20; ++i) {
        stream.fill(x);
        obs.observe(static_cast<std::uint64_t>(i + 1), x);
    }
    CHECK(obs.moments().count() == 20);
    const auto& snaps = obs.snapshots();
    REQUIRE(snaps.size() == 4); // n = 2, 4, 8, 16
    CHECK(snaps[0].n == 2);
    CHECK(snaps[3].n == 16);

    // rmse against the final std: zero when compared with itself.
    const auto final_std = obs.moments().std_dev();
    std::vector<StdSnapshot> same = {{20, final_std}};
    const ScalarTrace t = rmse_std_trace(same, final_std);
    CHECK(t.name == "rmse_std");
    CHECK(t.values[0] == 0.0);
}

TEST_CASE("observers: fourier accumulator sees the unnormalized spectrum") {
    FourierMomentObserver obs(4, 2);
    const std::vector<double> flat(8, 0.25);
    obs.observe(1, flat);
    obs.observe(2, flat);
    // Constant image: DC entry h*w*c, every other frequency zero.
    CHECK(obs.real_moments().mean()[0] == doctest::Approx(2.0).epsilon(1e-12));
    for (std::size_t i = 1; i < 8; ++i) {
        CHECK(obs.real_moments().mean()[i] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(obs.imag_moments().mean()[i] == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK(obs.real_moments().variance()[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("observers: multiscale level 0 reproduces the plain std map") {
    MultiscaleMomentObserver multi(8, 8, 2);
    MomentObserver plain(64);
    GaussianStream stream(12);
    std::vector<double> x(64);
    for (int i = 0; i < 30; ++i) {
        stream.fill(x);
        multi.observe(static_cast<std::uint64_t>(i + 1), x);
        plain.observe(static_cast<std::uint64_t>(i + 1), x);
    }
    CHECK(multi.max_scale() == 2);
    CHECK(multi.scale(0).std_dev() == plain.moments().std_dev());
    CHECK(multi.scale(2).dim() == 4);

    CHECK_THROWS_AS(MultiscaleMomentObserver(4, 6, 2), DimensionError);
}

TEST_CASE("observers: l2 distance and strided psnr traces") {
    L2DistanceObserver l2(std::vector<double>{0.0, 0.0});
    l2.observe(1, std::vector<double>{3.0, 4.0});
    CHECK(l2.trace().values[0] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(l2.trace().name == "l2_to_ref");

    PsnrTraceObserver ptr(std::vector<double>{0.0, 0.0}, 1.0, 2);
    ptr.observe(10, std::vector<double>{0.2, 0.2});
    ptr.observe(20, std::vector<double>{0.0, 0.0});
    ptr.observe(30, std::vector<double>{0.2, 0.2});
    ptr.observe(40, std::vector<double>{0.0, 0.0});
    const auto& t = ptr.trace();
    CHECK(t.name == "psnr_mean");
    REQUIRE(t.size() == 2); // every second observation
    CHECK(t.iterations[0] == 20);
    CHECK(t.iterations[1] == 40);
    // Running mean after 2 samples is 0.1 against truth 0: psnr 20 dB.
    CHECK(t.values[0] == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("observers: coordinate selection waits for its warmup") {
    SelectedCoordinateObserver sel(3, 3);
    // Warmup samples: variances 0 / small / large across coordinates.
    sel.observe(1, std::vector<double>{1.0, 0.0, 10.0});
    sel.observe(2, std::vector<double>{1.0, 0.1, -10.0});
    CHECK_FALSE(sel.selected());
    sel.observe(3, std::vector<double>{1.0, 0.2, 10.0});
    CHECK(sel.selected());
    CHECK(sel.traces()[0].size() == 0); // the selection sample is not traced

    sel.observe(4, std::vector<double>{7.0, 8.0, 9.0});
    CHECK(sel.selection().argmin == 0);
    CHECK(sel.selection().median == 1);
    CHECK(sel.selection().argmax == 2);
    CHECK(sel.traces()[0].values == std::vector<double>{7.0});
    CHECK(sel.traces()[1].values == std::vector<double>{8.0});
    CHECK(sel.traces()[2].values == std::vector<double>{9.0});
    CHECK(sel.traces()[2].name == "var_argmax");
}
