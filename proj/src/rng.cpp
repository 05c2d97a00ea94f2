#include "pnp/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pnp/errors.hpp"

namespace pnp {

GaussianStream::GaussianStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 53-bit mantissa uniforms; u1 shifted into (0,1] so log stays finite.
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

void GaussianStream::fill(std::span<double> out) {
    for (double& v : out) v = next();
}

std::string GaussianStream::serialize() const {
    std::ostringstream os;
    os << seed_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
    os.precision(17);
    os << spare_ << ' ' << engine_;
    return os.str();
}

GaussianStream GaussianStream::deserialize(const std::string& text) {
    std::istringstream is(text);
    std::uint64_t seed = 0;
    int has_spare = 0;
    double spare = 0.0;
    if (!(is >> seed >> has_spare >> spare))
        throw TransportError("GaussianStream: malformed serialized state");
    GaussianStream s(seed);
    if (!(is >> s.engine_))
        throw TransportError("GaussianStream: malformed engine state");
    s.spare_ = spare;
    s.has_spare_ = has_spare != 0;
    return s;
}

bool GaussianStream::operator==(const GaussianStream& o) const {
    return seed_ == o.seed_ && has_spare_ == o.has_spare_ && spare_ == o.spare_ &&
           engine_ == o.engine_;
}

} // namespace pnp
