// Out-of-process denoiser used by the test suite. Modes:
//   echo                 reply with the input unchanged
//   gaussian <mean> <s2> exact Gaussian-prior denoiser, matches the in-process one
//   fail                 reply status 1 to every request
//   die                  read one request, then exit without replying
#include <cstdlib>
#include <iostream>
#include <string>

#include "pnp/denoiser.hpp"
#include "pnp/external.hpp"

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "echo";

    if (mode == "die") {
        const auto req = pnp::wire::read_request(std::cin);
        return req ? 0 : 1;
    }

    if (mode == "gaussian") {
        if (argc < 4) {
            std::cerr << "usage: denoiser_stub gaussian <mean> <variance>\n";
            return 2;
        }
        const pnp::GaussianDenoiser den(std::atof(argv[2]), std::atof(argv[3]));
        pnp::serve_denoiser(std::cin, std::cout,
                            [&](const pnp::wire::Request& req, std::vector<double>& out) {
                                out.resize(req.pixels.size());
                                den.denoise(req.pixels, req.eps, out);
                                return std::uint8_t{0};
                            });
        return 0;
    }

    if (mode == "fail") {
        pnp::serve_denoiser(std::cin, std::cout,
                            [](const pnp::wire::Request&, std::vector<double>&) {
                                return std::uint8_t{1};
                            });
        return 0;
    }

    pnp::serve_denoiser(std::cin, std::cout,
                        [](const pnp::wire::Request& req, std::vector<double>& out) {
                            out = req.pixels;
                            return std::uint8_t{0};
                        });
    return 0;
}
