#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pnp/denoiser.hpp"
#include "pnp/errors.hpp"
#include "pnp/external.hpp"

using namespace pnp;

namespace {

std::string as_string(const std::vector<std::uint8_t>& bytes) {
    return std::string(bytes.begin(), bytes.end());
}

} // namespace

TEST_CASE("wire: request encoding round-trips through the reader") {
    const std::vector<double> px = {0.5, -1.25, 3e-5, 0.0, 1e300, -0.0};
    const auto bytes = wire::encode_request(2, 3, 0.125, px);

    std::istringstream in(as_string(bytes));
    const auto req = wire::read_request(in);
    REQUIRE(req.has_value());
    CHECK(req->height == 2);
    CHECK(req->width == 3);
    CHECK(req->eps == 0.125);
    CHECK(req->pixels == px);

    // The stream is now at a clean boundary: next read reports end-of-stream.
    CHECK_FALSE(wire::read_request(in).has_value());
}

TEST_CASE("wire: malformed streams are transport errors, not EOF") {
    const auto full = wire::encode_request(1, 2, 0.5, std::vector<double>{1.0, 2.0});

    SUBCASE("truncated mid-message") {
        for (std::size_t cut : {std::size_t{3}, std::size_t{9}, full.size() - 1}) {
            std::istringstream in(
                as_string({full.begin(), full.begin() + static_cast<long>(cut)}));
            CHECK_THROWS_AS(wire::read_request(in), TransportError);
        }
    }
    SUBCASE("wrong magic") {
        auto bad = full;
        bad[0] = 'X';
        std::istringstream in(as_string(bad));
        CHECK_THROWS_AS(wire::read_request(in), TransportError);
    }
    SUBCASE("unknown version") {
        auto bad = full;
        bad[4] = 9;
        std::istringstream in(as_string(bad));
        CHECK_THROWS_AS(wire::read_request(in), TransportError);
    }
}

TEST_CASE("wire: serve loop answers every request in order") {
    std::string feed;
    feed += as_string(wire::encode_request(1, 2, 0.1, std::vector<double>{1.0, 2.0}));
    feed += as_string(wire::encode_request(1, 2, 0.2, std::vector<double>{3.0, 4.0}));

    std::istringstream in(feed);
    std::ostringstream out;
    serve_denoiser(in, out, [](const wire::Request& req, std::vector<double>& o) {
        o = req.pixels;
        for (double& v : o) v += req.eps;
        return std::uint8_t{0};
    });

    std::string want;
    want += as_string(wire::encode_response(0, std::vector<double>{1.1, 2.1}));
    want += as_string(wire::encode_response(0, std::vector<double>{3.2, 4.2}));
    CHECK(out.str() == want);
}

TEST_CASE("wire: serve loop forwards failure statuses without pixels") {
    std::istringstream in(
        as_string(wire::encode_request(1, 1, 0.1, std::vector<double>{1.0})));
    std::ostringstream out;
    serve_denoiser(in, out,
                   [](const wire::Request&, std::vector<double>&) {
                       return std::uint8_t{1};
                   });
    CHECK(out.str() == as_string(wire::encode_response(1, {})));
}

TEST_CASE("external: echo subprocess acts as the identity denoiser") {
    ExternalDenoiser den({PNP_STUB_PATH, "echo"}, 0.5);
    CHECK(den.residual_lipschitz(0.1) == 0.5);
    CHECK(den.describe().find("echo") == std::string::npos); // argv0 only
    CHECK(den.describe().find("denoiser_stub") != std::string::npos);

    const std::vector<double> x = {0.25, -1.0, 0.75, 2.5};
    std::vector<double> out(4, 0.0);
    den.denoise(x, 0.3, out);
    CHECK(out == x);

    // Same instance serves repeated rounds over one pipe pair.
    den.set_shape(2, 2);
    den.denoise(x, 0.9, out);
    CHECK(out == x);
}

TEST_CASE("external: gaussian subprocess matches the in-process denoiser") {
    ExternalDenoiser den({PNP_STUB_PATH, "gaussian", "0.3", "0.49"}, 1.0);
    const GaussianDenoiser ref(0.3, 0.49);

    const std::vector<double> x = {-0.5, 0.0, 0.31, 4.0};
    std::vector<double> got(4), want(4);
    den.denoise(x, 0.25, got);
    ref.denoise(x, 0.25, want);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("external: provider failures surface as transport errors") {
    const std::vector<double> x = {1.0};
    std::vector<double> out(1);

    SUBCASE("nonzero status") {
        ExternalDenoiser den({PNP_STUB_PATH, "fail"}, 1.0);
        CHECK_THROWS_AS(den.denoise(x, 0.1, out), TransportError);
    }
    SUBCASE("child exits without replying") {
        ExternalDenoiser den({PNP_STUB_PATH, "die"}, 1.0);
        CHECK_THROWS_AS(den.denoise(x, 0.1, out), TransportError);
    }
}

TEST_CASE("external: constructor validates its arguments") {
    CHECK_THROWS_AS(ExternalDenoiser({}, 1.0), ConfigError);
    CHECK_THROWS_AS(ExternalDenoiser({PNP_STUB_PATH, "echo"}, -1.0), ConfigError);
}
