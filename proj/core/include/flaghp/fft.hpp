#pragma once

#include <span>

#include "flaghp/sampled_function.hpp"

namespace flaghp::fft {

/// In-place unnormalized forward DFT (exponent -i) over a row-major cube.
void forward(std::span<cplx> data, std::span<const int> shape);

/// In-place inverse DFT scaled by 1/size, so inverse(forward(x)) == x.
void inverse(std::span<cplx> data, std::span<const int> shape);

/// Forward DFT of f, returned as a new array.
std::vector<cplx> spectrum(const SampledFunction& f);

/// Inverse of `spectrum`: builds a function on f-shaped layout.
SampledFunction from_spectrum(const Grid& grid, Domain domain,
                              std::vector<cplx> spec);

}  // namespace flaghp::fft
