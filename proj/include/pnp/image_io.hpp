#pragma once

#include <string>

#include "pnp/field.hpp"

namespace pnp {

// Raw lossless field container. 16-byte header: magic "PNPF", u32 height,
// u32 width, u32 reserved (zero), all little-endian, followed by height*width
// little-endian f64 values in row-major order.
void write_field_raw(const ImageField& x, const std::string& path);
ImageField read_field_raw(const std::string& path);

// Plain-text PGM (P2), maxval 255. Values are clamped to [0,1] and quantized
// linearly; lossy by design, preview only.
void write_field_pgm(const ImageField& x, const std::string& path);
// Reads P2, mapping 0..maxval back onto [0,1].
ImageField read_field_pgm(const std::string& path);

} // namespace pnp
