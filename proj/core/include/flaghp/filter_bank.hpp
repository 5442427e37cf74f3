#pragma once

#include <compare>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "flaghp/sampled_function.hpp"

namespace flaghp {

/// C-infinity monotone step: 0 for t <= 0, 1 for t >= 1, and
/// smooth_step(1 - t) == 1 - smooth_step(t). Normalized integral of the
/// bump exp(-1 / (s (1 - s))).
double smooth_step(double t);

enum class Profile { meyer_smooth, shannon_sharp };

const char* to_string(Profile p);
Profile parse_profile(const std::string& s);

/// Inclusive integer interval.
struct ScaleRange {
  int lo = 0;
  int hi = 0;

  int count() const { return hi - lo + 1; }
  bool contains(int v) const { return v >= lo && v <= hi; }
  bool operator==(const ScaleRange&) const = default;
};

struct ScalePair {
  int j = 0;
  int k = 0;

  auto operator<=>(const ScalePair&) const = default;
};

/// Cell geometry of the flag rectangle tiles at one scale pair. The first
/// factor cube I has side 2^-j and the second factor cube J has side
/// 2^-min(j,k), both snapped to a power-of-two number of cells in [1, N].
struct TileShape {
  int cells_i = 1;
  int cells_j = 1;
  double side_i = 0.0;
  double side_j = 0.0;
};

TileShape tile_shape(const Grid& grid, ScalePair sp);

/// Spectral windows of the flag Littlewood-Paley filters. Frequencies are in
/// cycles per unit length. Window j of the first factor lives on the full
/// (n+m)-dimensional DFT grid, window k of the second factor on the
/// m-dimensional DFT grid of the trailing axes.
///
/// The residual ("coarse") channel is stored as squared magnitudes:
///   residual1 = 1 - sum_j psi1_j^2,  residual2 = 1 - sum_k psi2_k^2,
///   residual  = 1 - (sum_j psi1_j^2)(sum_k psi2_k^2)   on the full grid,
/// so that sum_{j,k} |psi1_j psi2_k|^2 + residual == 1 everywhere.
class FilterBank {
 public:
  FilterBank() = default;

  const Grid& grid() const { return grid_; }
  ScaleRange j_range() const { return j_range_; }
  ScaleRange k_range() const { return k_range_; }
  Profile profile() const { return profile_; }
  int moment_order() const { return moment_order_; }
  /// Annulus constants: window j is supported in c1 2^j <= |xi| <= c2 2^j.
  double c1() const { return c1_; }
  double c2() const { return c2_; }

  std::span<const double> psi1(int j) const;
  std::span<const double> psi2(int k) const;
  std::span<const double> residual1() const { return residual1_; }
  std::span<const double> residual2() const { return residual2_; }
  std::span<const double> residual() const { return residual_; }

  /// All scale pairs in (j, k) lexicographic order.
  std::vector<ScalePair> scale_pairs() const;
  bool contains(ScalePair sp) const {
    return j_range_.contains(sp.j) && k_range_.contains(sp.k);
  }

  /// Kernel constant used by the lifted-particle size bound; the maximum of
  /// per_pair_constant over the lattice.
  double kernel_constant() const { return kernel_constant_; }
  double per_pair_constant(ScalePair sp) const;

  /// Builds a bank from explicit windows (used for loading and for fault
  /// injection in tests). Window sizes are validated; the kernel constant
  /// is recomputed from the supplied windows.
  static FilterBank from_windows(const Grid& grid, ScaleRange jr, ScaleRange kr,
                                 Profile profile, int moment_order,
                                 std::vector<std::vector<double>> psi1,
                                 std::vector<std::vector<double>> psi2,
                                 std::vector<double> residual1,
                                 std::vector<double> residual2,
                                 std::vector<double> residual);

 private:
  friend FilterBank build_filter_bank(const Grid&, ScaleRange, ScaleRange,
                                      Profile, int);
  void compute_kernel_constants();

  Grid grid_{};
  ScaleRange j_range_{};
  ScaleRange k_range_{};
  Profile profile_ = Profile::meyer_smooth;
  int moment_order_ = 2;
  double c1_ = 1.0;
  double c2_ = 4.0;
  std::vector<std::vector<double>> psi1_;
  std::vector<std::vector<double>> psi2_;
  std::vector<double> residual1_;
  std::vector<double> residual2_;
  std::vector<double> residual_;
  std::vector<double> pair_constants_;
  double kernel_constant_ = 0.0;
};

/// Default moment order ceil((2/p - 1/2) max(n, m)).
int default_moment_order(const Grid& grid, double p);

/// Throws ConfigError for an empty range or a range whose top window would
/// reach past the Nyquist frequency N / (2 side).
FilterBank build_filter_bank(const Grid& grid, ScaleRange j_range,
                             ScaleRange k_range, Profile profile,
                             int moment_order = 2);

/// psi1_j(xi1, xi2) * psi2_k(xi2) on the full DFT grid.
std::vector<double> flag_kernel_spectrum(const FilterBank& bank, ScalePair sp);

/// Space-side kernel psi_{j,k}, normalized so that
/// convolve(f, kernel) == apply_multiplier(f, flag_kernel_spectrum).
SampledFunction kernel_space_side(const FilterBank& bank, ScalePair sp);

struct IdentityCheck {
  double deviation = 0.0;      ///< max over all checks
  double product = 0.0;        ///< sum_{j,k} |psi_jk|^2 + residual - 1
  double first = 0.0;          ///< sum_j |psi1_j|^2 + residual1 - 1
  double second = 0.0;         ///< sum_k |psi2_k|^2 + residual2 - 1
  std::vector<int> worst_index;  ///< DFT multi-index of the product maximum
  std::vector<double> worst_frequency;
};

IdentityCheck check_resolution_identity_detail(const FilterBank& bank);
double check_resolution_identity(const FilterBank& bank);

/// JSON descriptor (profile, ranges, grid, c1, c2, moment order, kernel
/// constant). Building from the descriptor reproduces the windows exactly.
std::string bank_descriptor_json(const FilterBank& bank);
FilterBank bank_from_descriptor(const std::string& json_text);

/// Directory with `bank.json` plus `windows.bin` (all windows as raw
/// little-endian float64, psi1 by j, psi2 by k, residual1, residual2,
/// residual).
void save_bank(const std::filesystem::path& dir, const FilterBank& bank);
FilterBank load_bank(const std::filesystem::path& dir);

}  // namespace flaghp
