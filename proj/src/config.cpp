#include "pnp/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "pnp/errors.hpp"

namespace pnp {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_optional(const std::optional<double>& v) {
    return v ? fmt_double(*v) : "auto";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// One mutable binding per key: a writer (parse) and a reader (serialize).
struct KeyBinding {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

void parse_into_double(double& dst, const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        dst = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + v + "'");
    }
}

void parse_into_u64(std::uint64_t& dst, const std::string& v, const std::string& where) {
    const auto* first = v.data();
    const auto* last = v.data() + v.size();
    const auto res = std::from_chars(first, last, dst);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ConfigError(where + ": expected a nonnegative integer, got '" + v + "'");
    }
}

void parse_into_bool(bool& dst, const std::string& v, const std::string& where) {
    if (v == "true") {
        dst = true;
    } else if (v == "false") {
        dst = false;
    } else {
        throw ConfigError(where + ": expected true or false, got '" + v + "'");
    }
}

using Schema = std::vector<std::pair<std::string, std::vector<std::pair<std::string, KeyBinding>>>>;

#define STRING_KEY(field)                                                        \
    KeyBinding{[](ExperimentConfig& c, const std::string& v) { c.field = v; },   \
               [](const ExperimentConfig& c) { return c.field; }}
#define DOUBLE_KEY(field)                                                        \
    KeyBinding{[](ExperimentConfig& c, const std::string& v) {                   \
                   parse_into_double(c.field, v, #field);                        \
               },                                                                \
               [](const ExperimentConfig& c) { return fmt_double(c.field); }}
#define U64_KEY(field)                                                           \
    KeyBinding{[](ExperimentConfig& c, const std::string& v) {                   \
                   parse_into_u64(c.field, v, #field);                           \
               },                                                                \
               [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define BOOL_KEY(field)                                                          \
    KeyBinding{[](ExperimentConfig& c, const std::string& v) {                   \
                   parse_into_bool(c.field, v, #field);                          \
               },                                                                \
               [](const ExperimentConfig& c) { return c.field ? "true" : "false"; }}
#define OPT_DOUBLE_KEY(field)                                                    \
    KeyBinding{[](ExperimentConfig& c, const std::string& v) {                   \
                   if (v == "auto") {                                            \
                       c.field.reset();                                          \
                   } else {                                                      \
                       double tmp = 0.0;                                         \
                       parse_into_double(tmp, v, #field);                        \
                       c.field = tmp;                                            \
                   }                                                             \
               },                                                                \
               [](const ExperimentConfig& c) { return fmt_optional(c.field); }}

const Schema& schema() {
    static const Schema s = {
        {"task",
         {
             {"kind", STRING_KEY(task)},
             {"input", STRING_KEY(input)},
             {"observation", STRING_KEY(observation)},
             {"mask", STRING_KEY(mask_path)},
             {"output_dir", STRING_KEY(output_dir)},
         }},
        {"degradation",
         {
             {"blur_size", U64_KEY(blur_size)},
             {"sigma", DOUBLE_KEY(sigma)},
             {"hidden_fraction", DOUBLE_KEY(hidden_fraction)},
             {"seed", U64_KEY(degrade_seed)},
         }},
        {"denoiser",
         {
             {"kind", STRING_KEY(denoiser)},
             {"prior_mean", DOUBLE_KEY(prior_mean)},
             {"prior_var", DOUBLE_KEY(prior_var)},
             {"gmm_means", STRING_KEY(gmm_means)},
             {"gmm_weights", STRING_KEY(gmm_weights)},
             {"gmm_var", DOUBLE_KEY(gmm_var)},
             {"declared_l", OPT_DOUBLE_KEY(declared_l)},
             {"command", STRING_KEY(external_command)},
         }},
        {"sampler",
         {
             {"variant", STRING_KEY(variant)},
             {"delta", OPT_DOUBLE_KEY(delta)},
             {"lambda", OPT_DOUBLE_KEY(lambda)},
             {"alpha", DOUBLE_KEY(alpha)},
             {"epsilon", DOUBLE_KEY(epsilon)},
             {"c_lo", DOUBLE_KEY(c_lo)},
             {"c_hi", DOUBLE_KEY(c_hi)},
             {"n_iter", U64_KEY(n_iter)},
             {"burn_in", U64_KEY(burn_in)},
             {"thinning", U64_KEY(thinning)},
             {"seed", U64_KEY(seed)},
             {"n_chains", U64_KEY(n_chains)},
             {"strict", BOOL_KEY(strict)},
         }},
        {"diagnostics",
         {
             {"std_maps", BOOL_KEY(std_maps)},
             {"fourier", BOOL_KEY(fourier)},
             {"multiscale", BOOL_KEY(multiscale)},
             {"multiscale_i_max", U64_KEY(multiscale_i_max)},
             {"acf_max_lag", U64_KEY(acf_max_lag)},
             {"trace_stride", U64_KEY(trace_stride)},
             {"select_warmup", U64_KEY(select_warmup)},
             {"psnr_trace", BOOL_KEY(psnr_trace)},
             {"std_snapshots", BOOL_KEY(std_snapshots)},
         }},
        {"output",
         {
             {"write_pgm", BOOL_KEY(write_pgm)},
             {"write_checkpoint", BOOL_KEY(write_checkpoint)},
             {"resume_from", STRING_KEY(resume_from)},
         }},
    };
    return s;
}

#undef STRING_KEY
#undef DOUBLE_KEY
#undef U64_KEY
#undef BOOL_KEY
#undef OPT_DOUBLE_KEY

} // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, keys] : schema()) {
        if (!first) out << "\n";
        first = false;
        out << "[" << section << "]\n";
        for (const auto& [name, binding] : keys) {
            out << name << " = " << binding.get(cfg) << "\n";
        }
    }
    return out.str();
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        const std::string where = origin + ":" + std::to_string(lineno);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(where + ": malformed section header '" + t + "'");
            section = t.substr(1, t.size() - 2);
            bool known = false;
            for (const auto& [name, keys] : schema()) known |= (name == section);
            if (!known) throw ConfigError(where + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (section.empty())
            throw ConfigError(where + ": key '" + key + "' appears before any [section]");

        const KeyBinding* binding = nullptr;
        for (const auto& [name, keys] : schema()) {
            if (name != section) continue;
            for (const auto& [kname, b] : keys) {
                if (kname == key) binding = &b;
            }
        }
        if (binding == nullptr)
            throw ConfigError(where + ": unknown key '" + section + "." + key + "'");
        try {
            binding->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    }
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(assignment.substr(eq + 1));
    for (const auto& [name, keys] : schema()) {
        if (name != section) continue;
        for (const auto& [kname, binding] : keys) {
            if (kname != key) continue;
            binding.set(cfg, value);
            return;
        }
    }
    throw ConfigError("override names unknown key '" + section + "." + key + "'");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

void save_config(const std::string& path, const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw TransportError("cannot open " + path + " for writing");
    out << serialize_config(cfg);
    if (!out) throw TransportError("failed writing " + path);
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string s = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) throw ConfigError("empty entry in list '" + text + "'");
        double v = 0.0;
        parse_into_double(v, t, "list entry");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("expected a comma-separated number list, got '" + text + "'");
    return out;
}

} // namespace pnp
