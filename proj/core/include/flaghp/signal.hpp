#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flaghp/sampled_function.hpp"

namespace flaghp {

enum class SignalKind {
  gaussian_bump,
  tensor_oscillation,
  band_limited_random,
  indicator_smooth,
  delta,
};

const char* to_string(SignalKind k);
SignalKind parse_signal_kind(const std::string& s);

/// Test-signal recipe. Coordinates are physical; empty `center` means the
/// middle of the torus. Frequencies and bands are in cycles per unit length.
struct SignalSpec {
  SignalKind kind = SignalKind::gaussian_bump;
  std::vector<double> center;
  std::vector<double> widths;
  std::vector<double> frequency;
  /// band-limited-random: |xi| over the full frequency vector in [lo, hi]
  /// and |xi_2| (second factor only) in [lo2, hi2].
  double band_lo = 0.0;
  double band_hi = 0.0;
  double band2_lo = 0.0;
  double band2_hi = 0.0;
  std::uint64_t seed = 0;
  double amplitude = 1.0;

  bool operator==(const SignalSpec&) const = default;
};

/// Parses "kind;key=v1,v2;key=v" (keys: center, widths, frequency, band,
/// band2, seed, amplitude).
SignalSpec parse_signal_spec(const std::string& text);
std::string format_signal_spec(const SignalSpec& spec);

/// Samples the recipe on `grid`. Deterministic: identical inputs give
/// bitwise-identical arrays. band-limited-random content is generated per
/// integer frequency vector, so the same function results at every L whose
/// Nyquist range contains the band; it has zero mean up to round-off.
SampledFunction synthesize(const SignalSpec& spec, const Grid& grid);

}  // namespace flaghp
