#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "flaghp/sampled_function.hpp"

namespace flaghp {

enum class MaximalFamily { dyadic, dyadic_shifted };

const char* to_string(MaximalFamily f);
MaximalFamily parse_maximal_family(const std::string& s);

/// Admissible rectangles are products of one-dimensional periodic dyadic
/// intervals [o + t 2^s, o + (t+1) 2^s) in sample units, with level s in
/// [0, L] chosen per axis. The shifted family also allows o = 2^(s-1).
/// `max_scale_span` caps |s_a - s_b| between any two axes; a negative value
/// means "no cap" (equivalent to L).
struct MaximalConfig {
  MaximalFamily family = MaximalFamily::dyadic;
  int max_scale_span = -1;
};

/// Validates max_scale_span <= L against the grid; throws ConfigError.
void validate(const MaximalConfig& cfg, const Grid& grid);

/// sup over admissible rectangles containing x of the average of |f|.
SampledFunction strong_maximal(const SampledFunction& f, const MaximalConfig& cfg);

/// Same with cubes only (one common level on every axis).
SampledFunction hl_maximal(const SampledFunction& f, const MaximalConfig& cfg);

/// Subset of the sample lattice of a base grid.
class SampledSet {
 public:
  SampledSet() = default;
  explicit SampledSet(const Grid& grid);
  SampledSet(const Grid& grid, std::vector<std::uint8_t> mask);

  const Grid& grid() const { return grid_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  bool contains(std::size_t i) const { return mask_[i] != 0; }
  void insert(std::size_t i);
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  double measure() const { return static_cast<double>(count_) * grid_.cell_volume(); }
  /// Number of the listed samples that lie in the set.
  std::size_t count_in(std::span<const std::size_t> cells) const;
  bool subset_of(const SampledSet& other) const;
  SampledFunction indicator() const;

  bool operator==(const SampledSet&) const = default;

 private:
  Grid grid_{};
  std::vector<std::uint8_t> mask_;
  std::size_t count_ = 0;
};

/// {x : Re f(x) > t}.
SampledSet superlevel(const SampledFunction& f, double t);

/// {x : M_s(chi_set)(x) > threshold}, with a strict inequality.
SampledSet enlarge(const SampledSet& set, const MaximalConfig& cfg, double threshold);

/// Periodic box dilation: a sample joins the set when some member lies
/// within radius[a] samples along every axis a. A radius >= N/2 covers the
/// whole axis.
SampledSet dilate(const SampledSet& set, std::span<const int> radius);

/// Alternating run lengths starting with a run of zeros (possibly empty).
std::vector<std::uint64_t> run_lengths(const SampledSet& set);
SampledSet from_run_lengths(const Grid& grid, std::span<const std::uint64_t> runs);

/// JSON record {grid, count, measure, runs}.
std::string set_to_json(const SampledSet& set);
SampledSet set_from_json(const std::string& text);

}  // namespace flaghp
