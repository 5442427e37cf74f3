#pragma once

#include <span>

#include "flaghp/sampled_function.hpp"

namespace flaghp {

/// Circular convolution scaled by the cell volume, so that it approximates
/// the integral convolution. Computed in the frequency domain.
SampledFunction convolve(const SampledFunction& f, const SampledFunction& g);

/// (sum |f|^p * cellvolume)^(1/p). Throws ConfigError for p <= 0.
double lp_norm(const SampledFunction& f, double p);

/// sum |f|^p * cellvolume, i.e. lp_norm(f, p)^p without the final root.
double lp_norm_pow(const SampledFunction& f, double p);

/// sum f * conj(g) * cellvolume.
cplx inner(const SampledFunction& f, const SampledFunction& g);

/// Inverse DFT of (DFT f) * multiplier; multiplier is on the DFT index grid.
SampledFunction apply_multiplier(const SampledFunction& f,
                                 std::span<const double> multiplier);
SampledFunction apply_multiplier(const SampledFunction& f,
                                 std::span<const cplx> multiplier);

/// Repeated centered first difference (f(x+h) - f(x-h)) / 2h along one axis,
/// periodic, applied `order` times. Works on any rank.
std::vector<cplx> central_difference(std::span<const cplx> values,
                                     std::span<const int> shape, int axis,
                                     int order, double h);

/// Trigonometric interpolation of a periodic rank-`rank` cube with `n`
/// samples per axis onto the grid refined `factor` times per axis (zero
/// padding of the spectrum; a Nyquist bin is split evenly between +n/2 and
/// -n/2). The samples at multiples of `factor` reproduce the input.
std::vector<cplx> trig_upsample(std::span<const cplx> values, int rank, int n, int factor);

}  // namespace flaghp
