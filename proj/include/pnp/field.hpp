#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pnp {

// Dense row-major grid of doubles. The one pixel container everything else
// shares; 1D vectors ride along as height == 1.
class ImageField {
public:
    ImageField() = default;
    ImageField(std::size_t height, std::size_t width, double fill = 0.0);
    ImageField(std::size_t height, std::size_t width, std::vector<double> values);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return values_.size(); }

    double& at(std::size_t r, std::size_t c) { return values_[r * width_ + c]; }
    double at(std::size_t r, std::size_t c) const { return values_[r * width_ + c]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> span() { return values_; }
    std::span<const double> span() const { return values_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool same_shape(const ImageField& o) const {
        return height_ == o.height_ && width_ == o.width_;
    }
    bool all_finite() const;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

class ComplexField {
public:
    ComplexField() = default;
    ComplexField(std::size_t height, std::size_t width);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return values_.size(); }

    std::complex<double>& at(std::size_t r, std::size_t c) {
        return values_[r * width_ + c];
    }
    const std::complex<double>& at(std::size_t r, std::size_t c) const {
        return values_[r * width_ + c];
    }
    std::complex<double>& operator[](std::size_t i) { return values_[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return values_[i]; }

    std::vector<std::complex<double>>& values() { return values_; }
    const std::vector<std::complex<double>>& values() const { return values_; }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::complex<double>> values_;
};

// Componentwise projection onto the box [lo, hi]^d. lo >= hi is a
// configuration error.
void project_box(const ImageField& x, double lo, double hi, ImageField& out);
ImageField project_box(const ImageField& x, double lo, double hi);

// Block-mean downsampling by 2^level per axis. level 0 returns a copy.
// Dimensions must be divisible by 2^level.
ImageField downsample2(const ImageField& x, unsigned level);

} // namespace pnp
