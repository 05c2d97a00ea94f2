#include "pnp/field.hpp"

#include <cmath>

#include "pnp/errors.hpp"
#include "pnp/kernels.hpp"

namespace pnp {

ImageField::ImageField(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(height * width, fill) {}

ImageField::ImageField(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != height_ * width_)
        throw DimensionError("ImageField: value count does not match height*width");
}

bool ImageField::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

ComplexField::ComplexField(std::size_t height, std::size_t width)
    : height_(height), width_(width), values_(height * width) {}

void project_box(const ImageField& x, double lo, double hi, ImageField& out) {
    if (lo >= hi) throw ConfigError("project_box: lo must be < hi");
    if (!x.same_shape(out)) out = ImageField(x.height(), x.width());
    kernels::clamp(x.span(), lo, hi, out.span());
}

ImageField project_box(const ImageField& x, double lo, double hi) {
    ImageField out(x.height(), x.width());
    project_box(x, lo, hi, out);
    return out;
}

ImageField downsample2(const ImageField& x, unsigned level) {
    const std::size_t block = std::size_t{1} << level;
    if (x.height() % block != 0 || x.width() % block != 0)
        throw DimensionError("downsample2: dimensions not divisible by 2^level");
    if (level == 0) return x;

    const std::size_t oh = x.height() / block;
    const std::size_t ow = x.width() / block;
    ImageField out(oh, ow);
    const double inv = 1.0 / static_cast<double>(block * block);
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t dr = 0; dr < block; ++dr)
                for (std::size_t dc = 0; dc < block; ++dc)
                    acc += x.at(r * block + dr, c * block + dc);
            out.at(r, c) = acc * inv;
        }
    }
    return out;
}

} // namespace pnp
