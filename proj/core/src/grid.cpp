#include "flaghp/grid.hpp"

#include <cmath>
#include <string>

#include "flaghp/error.hpp"

namespace flaghp {

double Grid::cell_volume(int axes) const {
  return std::pow(spacing(), axes);
}

double Grid::volume(int axes) const { return std::pow(side, axes); }

Grid make_grid(int n, int m, int L, double side) {
  if (n < 1 || n > 2 || m < 1 || m > 2) {
    throw ConfigError("grid dimensions must satisfy 1 <= n,m <= 2 (got n=" +
                      std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }
  if (L < 3 || L > 12) {
    throw ConfigError("grid resolution L must lie in [3, 12] (got " +
                      std::to_string(L) + ")");
  }
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw ConfigError("grid side must be positive and finite");
  }
  return Grid{n, m, L, side};
}

std::vector<std::size_t> strides(int axes, int N) {
  std::vector<std::size_t> s(static_cast<std::size_t>(axes), 1);
  for (int a = axes - 2; a >= 0; --a) {
    s[a] = s[a + 1] * static_cast<std::size_t>(N);
  }
  return s;
}

}  // namespace flaghp
