#pragma once

#include <string>

#include "pnp/sampler.hpp"

namespace pnp {

// Chain snapshot on disk: the state vector in the raw field format plus a
// `<path>.meta` text sidecar carrying the iteration counter, the original
// seed, the owning config's hash, and the serialized rng so a resumed run
// continues the exact trajectory.
struct Checkpoint {
    ChainState state;
    std::uint64_t seed = 0;
    std::string config_hash;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

} // namespace pnp
