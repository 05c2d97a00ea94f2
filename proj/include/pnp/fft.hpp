#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "pnp/field.hpp"

namespace pnp {

// Unnormalized 2D DFT:  X[u,v] = sum_{r,c} x[r,c] exp(-2*pi*i*(u r/h + v c/w)).
// idft2 applies the 1/(h*w) factor and returns the real part.
// Power-of-two axes take the radix-2 path; anything else falls back to a
// direct O(n^2) transform per axis, fine at the grid sizes used here.
ComplexField dft2(const ImageField& x);
ImageField idft2(const ComplexField& X);
ComplexField idft2_complex(const ComplexField& X);

// 1D transform of a complex vector, same conventions (inverse carries 1/n).
void fft(std::vector<std::complex<double>>& a, bool inverse);

} // namespace pnp
