#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "flaghp/filter_bank.hpp"
#include "flaghp/sampled_function.hpp"

namespace flaghp {

/// Periodic tiling of the base grid by the flag rectangles of one scale
/// pair: every axis of the first factor is cut into cubes of cells_i
/// samples, every axis of the second factor into cubes of cells_j samples.
struct TileLayout {
  ScalePair sp;
  TileShape shape;
  std::vector<int> cells;   ///< cells per tile along each base axis
  std::vector<int> counts;  ///< tiles along each base axis
  std::size_t tiles = 0;

  /// Row-major tile id of the sample with flat index `flat`.
  std::size_t tile_of(std::size_t flat, int N) const;
  /// Lattice position of tile `id`.
  std::vector<int> position(std::size_t id) const;
  std::size_t id(std::span<const int> position) const;
};

TileLayout tile_layout(const Grid& grid, ScalePair sp);

/// Dyadic rectangle I x J at a scale pair. `index` holds the lattice
/// position of I (first n entries) followed by that of J (last m entries).
struct FlagRectangle {
  ScalePair sp;
  std::vector<int> index;

  std::span<const int> i_index(int n) const { return {index.data(), static_cast<std::size_t>(n)}; }
  std::span<const int> j_index(int n) const {
    return {index.data() + n, index.size() - static_cast<std::size_t>(n)};
  }
  bool operator==(const FlagRectangle&) const = default;
  auto operator<=>(const FlagRectangle&) const = default;
};

/// Rectangles of one scale pair in tile-id order.
std::vector<FlagRectangle> tiling(const Grid& grid, ScalePair sp);
FlagRectangle rectangle_of_tile(const TileLayout& layout, std::size_t id);

/// Flat sample indices covered by R.
std::vector<std::size_t> rectangle_cells(const Grid& grid, const FlagRectangle& r);
/// |R| = |I| |J| in physical units.
double rectangle_measure(const Grid& grid, const FlagRectangle& r);

/// The family psi_{j,k} * f over the bank lattice plus the coarse channel
/// (f filtered by the square root of the residual window).
struct FlagCoefficients {
  std::shared_ptr<const FilterBank> bank;
  std::map<ScalePair, SampledFunction> coeffs;
  SampledFunction coarse;

  const SampledFunction& at(ScalePair sp) const;
};

FlagCoefficients analyze(const SampledFunction& f, std::shared_ptr<const FilterBank> bank);

/// (sum_{j,k} |f_{j,k}|^2)^(1/2); the coarse channel is excluded.
SampledFunction square_function(const FlagCoefficients& c);

/// Like square_function, but each coefficient is replaced by its maximum
/// over the 3x dilate (the tile and its neighbours) of the flag rectangle
/// containing the sample. Tile maxima are taken on the trigonometric
/// interpolant refined by sup_oversampling, not just on the grid samples.
SampledFunction maximal_square_function(const FlagCoefficients& c);

/// Refinement cap for the tile suprema (samples in the refined cube).
inline constexpr double kMaxSupSamples = 4194304.0;

/// Power-of-two refinement per axis that puts >= 16 samples on a period of
/// `top_frequency` (cycles per unit), limited by kMaxSupSamples.
int sup_oversampling(const Grid& g, double top_frequency);

/// psi_{j,k} * g for one scale pair (synthesis side of the Calderon sum).
SampledFunction synthesize_pair(const FilterBank& bank, ScalePair sp, const SampledFunction& g);

/// The coarse channel pushed back through the residual filter; this is the
/// part of f that the atoms do not carry.
SampledFunction coarse_remainder(const FlagCoefficients& c);

/// sum_{j,k} psi_{j,k} * f_{j,k}, plus coarse_remainder when requested.
SampledFunction reconstruct(const FlagCoefficients& c, bool include_coarse = true);

/// lp_norm(square_function(analyze(f)), p); any p > 0 (p = 2 is the energy
/// sanity mode).
double hp_norm(const SampledFunction& f, std::shared_ptr<const FilterBank> bank, double p);

/// Writes `<dir>/j_<j>/k_<k>.bin`, `<dir>/coarse.bin` and
/// `<dir>/manifest.json`.
void write_coefficients(const std::filesystem::path& dir, const FlagCoefficients& c);
FlagCoefficients read_coefficients(const std::filesystem::path& dir,
                                   std::shared_ptr<const FilterBank> bank);

}  // namespace flaghp
