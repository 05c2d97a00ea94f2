#include "pnp/fft.hpp"

#include <cmath>
#include <numbers>

namespace pnp {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, bit-reversal permutation first.
void fft_pow2(cd* a, std::size_t n, bool inverse) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang =
            (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const cd wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd u = a[i + k];
                const cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void dft_naive(cd* a, std::size_t n, bool inverse) {
    std::vector<cd> out(n);
    const double sgn = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k) {
        cd acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = sgn * std::numbers::pi * static_cast<double>(k) *
                               static_cast<double>(t) / static_cast<double>(n);
            acc += a[t] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    for (std::size_t i = 0; i < n; ++i) a[i] = out[i];
}

void transform(cd* a, std::size_t n, bool inverse) {
    if (n <= 1) return;
    if (is_pow2(n))
        fft_pow2(a, n, inverse);
    else
        dft_naive(a, n, inverse);
}

// Row transforms in place, then column transforms through a strided copy.
void transform2(ComplexField& f, bool inverse) {
    const std::size_t h = f.height();
    const std::size_t w = f.width();
    for (std::size_t r = 0; r < h; ++r) transform(&f.at(r, 0), w, inverse);
    std::vector<cd> col(h);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t r = 0; r < h; ++r) col[r] = f.at(r, c);
        transform(col.data(), h, inverse);
        for (std::size_t r = 0; r < h; ++r) f.at(r, c) = col[r];
    }
}

} // namespace

void fft(std::vector<cd>& a, bool inverse) {
    transform(a.data(), a.size(), inverse);
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(a.size());
        for (cd& v : a) v *= inv;
    }
}

ComplexField dft2(const ImageField& x) {
    ComplexField F(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) F[i] = cd(x[i], 0.0);
    transform2(F, false);
    return F;
}

ComplexField idft2_complex(const ComplexField& X) {
    ComplexField F = X;
    transform2(F, true);
    const double inv = 1.0 / static_cast<double>(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= inv;
    return F;
}

ImageField idft2(const ComplexField& X) {
    const ComplexField F = idft2_complex(X);
    ImageField out(X.height(), X.width());
    for (std::size_t i = 0; i < F.size(); ++i) out[i] = F[i].real();
    return out;
}

} // namespace pnp
