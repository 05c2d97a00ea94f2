#include "pnp/image_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pnp/errors.hpp"

namespace pnp {

namespace {

constexpr char kMagic[4] = {'P', 'N', 'P', 'F'};

void put_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw TransportError("raw field read failed (truncated header): " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64le(std::ostream& os, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64le(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw TransportError("raw field read failed (truncated payload): " + path);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

} // namespace

void write_field_raw(const ImageField& x, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw TransportError("cannot open for writing: " + path);
    os.write(kMagic, 4);
    put_u32le(os, static_cast<std::uint32_t>(x.height()));
    put_u32le(os, static_cast<std::uint32_t>(x.width()));
    put_u32le(os, 0); // reserved, keeps the header at 16 bytes
    for (double v : x.values()) put_f64le(os, v);
    if (!os) throw TransportError("write failed: " + path);
}

ImageField read_field_raw(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw TransportError("cannot open for reading: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw TransportError("not a raw field file (bad magic): " + path);
    const std::uint32_t h = get_u32le(is, path);
    const std::uint32_t w = get_u32le(is, path);
    (void)get_u32le(is, path); // reserved
    ImageField x(h, w);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = get_f64le(is, path);
    // Trailing junk is suspicious enough to reject: these files are consumed
    // by resumable runs and determinism checks.
    char extra;
    if (is.read(&extra, 1))
        throw TransportError("raw field file has trailing bytes: " + path);
    return x;
}

void write_field_pgm(const ImageField& x, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw TransportError("cannot open for writing: " + path);
    os << "P2\n" << x.width() << ' ' << x.height() << "\n255\n";
    for (std::size_t r = 0; r < x.height(); ++r) {
        for (std::size_t c = 0; c < x.width(); ++c) {
            double v = x.at(r, c);
            if (v < 0.0) v = 0.0;
            if (v > 1.0) v = 1.0;
            const int q = static_cast<int>(std::lround(v * 255.0));
            os << q << (c + 1 == x.width() ? '\n' : ' ');
        }
    }
    if (!os) throw TransportError("write failed: " + path);
}

ImageField read_field_pgm(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw TransportError("cannot open for reading: " + path);
    std::string tag;
    is >> tag;
    if (tag != "P2") throw TransportError("unsupported PGM flavor (want P2): " + path);

    auto next_token = [&is, &path]() -> long {
        // Skip '#' comment lines, which are legal anywhere in the header.
        std::string tok;
        while (is >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            try {
                return std::stol(tok);
            } catch (const std::exception&) {
                throw TransportError("malformed PGM header token '" + tok + "': " + path);
            }
        }
        throw TransportError("truncated PGM file: " + path);
    };

    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token();
    if (w <= 0 || h <= 0 || maxval <= 0)
        throw TransportError("malformed PGM dimensions: " + path);

    ImageField x(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long v = next_token();
        x[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return x;
}

} // namespace pnp
