#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "pnp/fft.hpp"
#include "pnp/rng.hpp"

using namespace pnp;

namespace {

// Direct O(n^2) DFT, the definition the fast paths must reproduce.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& a,
                                            bool inverse) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * std::numbers::pi *
                               static_cast<double>(k * j) / static_cast<double>(n);
            acc += a[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

ImageField random_field(std::size_t h, std::size_t w, std::uint64_t seed) {
    ImageField f(h, w);
    GaussianStream(seed).fill(f.span());
    return f;
}

} // namespace

TEST_CASE("fft: 1d transform matches the direct dft") {
    for (const std::size_t n : {std::size_t{8}, std::size_t{12}}) { // radix-2 and fallback
        std::vector<std::complex<double>> a(n);
        GaussianStream g(n);
        for (auto& v : a) v = {g.next(), g.next()};

        auto fast = a;
        fft(fast, false);
        const auto slow = naive_dft(a, false);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(fast[i] - slow[i]) < 1e-11);

        fft(fast, true); // inverse returns the input
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(fast[i] - a[i]) < 1e-12);
    }
}

TEST_CASE("fft: 2d round trip is lossless") {
    for (const auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8},
                              {1, 16},
                              {6, 10}}) {
        const ImageField x = random_field(h, w, 100 + h * w);
        const ImageField back = idft2(dft2(x));
        REQUIRE(back.height() == h);
        REQUIRE(back.width() == w);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
}

TEST_CASE("fft: constant image concentrates at dc") {
    const ImageField x(4, 8, 0.25);
    const ComplexField X = dft2(x);
    CHECK(X.at(0, 0).real() == doctest::Approx(0.25 * 32).epsilon(1e-12));
    CHECK(std::abs(X.at(0, 0).imag()) < 1e-12);
    for (std::size_t i = 1; i < X.size(); ++i) CHECK(std::abs(X[i]) < 1e-11);
}

TEST_CASE("fft: parseval energy identity") {
    const ImageField x = random_field(8, 16, 7);
    const ComplexField X = dft2(x);
    double pixel = 0.0, spectral = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) pixel += x[i] * x[i];
    for (std::size_t i = 0; i < X.size(); ++i) spectral += std::norm(X[i]);
    CHECK(spectral == doctest::Approx(pixel * static_cast<double>(x.size())).epsilon(1e-12));
}

TEST_CASE("fft: transform is linear") {
    const ImageField a = random_field(4, 4, 1);
    const ImageField b = random_field(4, 4, 2);
    ImageField combo(4, 4);
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = 2.0 * a[i] - 3.0 * b[i];

    const ComplexField A = dft2(a), B = dft2(b), C = dft2(combo);
    for (std::size_t i = 0; i < C.size(); ++i)
        CHECK(std::abs(C[i] - (2.0 * A[i] - 3.0 * B[i])) < 1e-11);
}
