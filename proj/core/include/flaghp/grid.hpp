#pragma once

#include <cstddef>
#include <vector>

namespace flaghp {

/// Periodic sampling of a window of R^n x R^m: 2^L samples per axis and a
/// physical period `side` per axis. Axis order is the n axes of the first
/// factor followed by the m axes of the second factor.
struct Grid {
  int n = 1;
  int m = 1;
  int L = 3;
  double side = 1.0;

  int samples_per_axis() const { return 1 << L; }
  int dims() const { return n + m; }
  /// Sample count of an array with `axes` axes of this resolution.
  std::size_t count(int axes) const { return std::size_t{1} << (L * axes); }
  std::size_t size() const { return count(dims()); }
  double spacing() const { return side / samples_per_axis(); }
  double cell_volume(int axes) const;
  double cell_volume() const { return cell_volume(dims()); }
  /// Total measure of the torus with `axes` axes.
  double volume(int axes) const;

  bool operator==(const Grid&) const = default;
};

/// Validated constructor: 1 <= n,m <= 2, 3 <= L <= 12, side > 0.
Grid make_grid(int n, int m, int L, double side = 1.0);

/// Signed DFT index in [-N/2, N/2).
inline int signed_index(int k, int N) { return k < N / 2 ? k : k - N; }

/// Frequency in cycles per unit length of DFT index k on this grid.
inline double frequency(const Grid& g, int k) {
  return signed_index(k, g.samples_per_axis()) / g.side;
}

/// Row-major strides for a cube of `axes` axes with N samples each.
std::vector<std::size_t> strides(int axes, int N);

}  // namespace flaghp
