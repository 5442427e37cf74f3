#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "flaghp/grid.hpp"

namespace flaghp {

using cplx = std::complex<double>;

/// Analysis domain. Lifted arrays carry an extra copy of the m second-factor
/// axes appended after the base axes.
enum class Domain { base = 0, lifted = 1 };

const char* to_string(Domain d);

class SampledFunction {
 public:
  SampledFunction() = default;
  /// Zero function.
  explicit SampledFunction(const Grid& grid, Domain domain = Domain::base);
  /// Takes ownership of `values`; throws Error on shape mismatch or
  /// non-finite entries.
  SampledFunction(const Grid& grid, Domain domain, std::vector<cplx> values);

  const Grid& grid() const { return grid_; }
  Domain domain() const { return domain_; }
  int rank() const;
  std::vector<int> shape() const;
  std::size_t size() const { return values_.size(); }
  double cell_volume() const { return grid_.cell_volume(rank()); }

  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }

  /// Throws Error if any entry is NaN or infinite.
  void check_finite() const;

  SampledFunction& operator+=(const SampledFunction& other);
  SampledFunction& operator-=(const SampledFunction& other);
  SampledFunction& operator*=(cplx s);

  bool operator==(const SampledFunction& other) const = default;

 private:
  Grid grid_{};
  Domain domain_ = Domain::base;
  std::vector<cplx> values_;
};

SampledFunction operator+(SampledFunction a, const SampledFunction& b);
SampledFunction operator-(SampledFunction a, const SampledFunction& b);
SampledFunction operator*(cplx s, SampledFunction a);

/// Pointwise absolute value (as a real-valued SampledFunction).
SampledFunction abs(const SampledFunction& f);

/// Largest |f|.
double max_abs(const SampledFunction& f);

/// Cyclic shift by an integer number of samples per axis.
SampledFunction shifted(const SampledFunction& f, std::span<const int> offset);

void require_same_layout(const SampledFunction& a, const SampledFunction& b,
                         const char* what);

}  // namespace flaghp
