#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace pnp {

// Seeded stream of standard normal draws.
//
// mt19937_64 supplies the uniform bits; the normal transform is Box-Muller
// with the spare value cached, so consecutive fills compose: fill(3) followed
// by fill(3) consumes the stream identically to fill(6). That property is
// what makes "one chain step advances the stream by exactly d draws" a
// meaningful contract. std::normal_distribution is avoided on purpose: its
// algorithm is implementation-defined, this transform is pinned.
class GaussianStream {
public:
    GaussianStream() : GaussianStream(0) {}
    explicit GaussianStream(std::uint64_t seed);

    double next();
    void fill(std::span<double> out);

    std::uint64_t seed() const { return seed_; }

    // Full state round-trip (engine + cached spare), used by checkpoints.
    std::string serialize() const;
    static GaussianStream deserialize(const std::string& text);

    bool operator==(const GaussianStream& o) const;

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace pnp
