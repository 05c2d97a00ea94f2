#include "pnp/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "pnp/errors.hpp"
#include "pnp/image_io.hpp"

namespace pnp {

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    // State vector rides in the raw field format as a 1 x d row; the logical
    // image shape belongs to the config, not the snapshot.
    write_field_raw(ImageField(1, c.state.x.size(), c.state.x), path);
    std::ofstream meta(path + ".meta");
    if (!meta) throw TransportError("cannot open " + path + ".meta for writing");
    meta << "k = " << c.state.k << "\n";
    meta << "seed = " << c.seed << "\n";
    meta << "config_hash = " << c.config_hash << "\n";
    meta << "rng = " << c.state.rng.serialize() << "\n";
    if (!meta) throw TransportError("failed writing " + path + ".meta");
}

Checkpoint load_checkpoint(const std::string& path) {
    Checkpoint c;
    const ImageField payload = read_field_raw(path);
    c.state.x = payload.values();

    std::ifstream meta(path + ".meta");
    if (!meta) throw TransportError("cannot open " + path + ".meta");
    std::string line;
    bool have_k = false, have_seed = false, have_hash = false, have_rng = false;
    while (std::getline(meta, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 3);
        try {
            if (key == "k") {
                c.state.k = std::stoull(value);
                have_k = true;
            } else if (key == "seed") {
                c.seed = std::stoull(value);
                have_seed = true;
            } else if (key == "config_hash") {
                c.config_hash = value;
                have_hash = true;
            } else if (key == "rng") {
                c.state.rng = GaussianStream::deserialize(value);
                have_rng = true;
            } else {
                throw TransportError("checkpoint sidecar: unknown key '" + key + "'");
            }
        } catch (const TransportError&) {
            throw;
        } catch (const std::exception& e) {
            throw TransportError("checkpoint sidecar: bad value for '" + key + "': " +
                                 e.what());
        }
    }
    if (!have_k || !have_seed || !have_hash || !have_rng) {
        throw TransportError("checkpoint sidecar " + path + ".meta is incomplete");
    }
    return c;
}

} // namespace pnp
