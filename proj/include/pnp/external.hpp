#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnp/denoiser.hpp"

namespace pnp {

// Wire protocol for out-of-process denoisers, little-endian throughout.
//
//   request:  "PNPD"  u8 version=1  u32 height  u32 width  f64 eps
//             height*width f64 pixels
//   response: "PNPR"  u8 status (0 = ok)
//             height*width f64 pixels (only when status == 0)
//
// One request, one response, strictly in order; the stream carries any number
// of request/response rounds.
namespace wire {

constexpr std::uint8_t kVersion = 1;

struct Request {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    double eps = 0.0;
    std::vector<double> pixels;
};

std::vector<std::uint8_t> encode_request(std::uint32_t height, std::uint32_t width,
                                         double eps, std::span<const double> pixels);
std::vector<std::uint8_t> encode_response(std::uint8_t status,
                                          std::span<const double> pixels);

// Reads one request; nullopt on clean EOF at a message boundary, throws
// TransportError on anything malformed or truncated.
std::optional<Request> read_request(std::istream& in);
void write_response(std::ostream& out, std::uint8_t status,
                    std::span<const double> pixels);

} // namespace wire

// Serve loop for the provider side: reads requests until EOF, passes each to
// the handler, writes the response. Handler returns the status byte and fills
// `out` (same length as the request) when returning 0.
using DenoiseHandler =
    std::function<std::uint8_t(const wire::Request& req, std::vector<double>& out)>;
void serve_denoiser(std::istream& in, std::ostream& out, const DenoiseHandler& handler);

// Client: one subprocess per instance, spoken to over stdin/stdout. Because
// the chain owns its endpoint, instances are deliberately not copyable and
// not thread-safe; parallel chains each spawn their own.
class ExternalDenoiser final : public Denoiser {
public:
    // argv[0] is the executable; declared_l is mandatory because nothing can
    // be derived about an opaque endpoint.
    ExternalDenoiser(std::vector<std::string> argv, double declared_l);
    ~ExternalDenoiser() override;

    ExternalDenoiser(const ExternalDenoiser&) = delete;
    ExternalDenoiser& operator=(const ExternalDenoiser&) = delete;

    void denoise(std::span<const double> x, double eps,
                 std::span<double> out) const override;
    double residual_lipschitz(double) const override { return declared_l_; }
    std::string describe() const override;

    // Shape of the fields this instance will send; 1 x n until told otherwise.
    void set_shape(std::uint32_t height, std::uint32_t width);

private:
    void spawn();
    void shutdown() noexcept;

    std::vector<std::string> argv_;
    double declared_l_;
    std::uint32_t height_ = 1;
    std::uint32_t width_ = 0;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
};

} // namespace pnp
