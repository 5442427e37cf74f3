#include "flaghp/sampled_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flaghp/error.hpp"

namespace flaghp {

const char* to_string(Domain d) {
  return d == Domain::base ? "base" : "lifted";
}

SampledFunction::SampledFunction(const Grid& grid, Domain domain)
    : grid_(grid), domain_(domain) {
  values_.assign(grid_.count(rank()), cplx{});
}

SampledFunction::SampledFunction(const Grid& grid, Domain domain,
                                 std::vector<cplx> values)
    : grid_(grid), domain_(domain), values_(std::move(values)) {
  if (values_.size() != grid_.count(rank())) {
    throw Error("sampled function has " + std::to_string(values_.size()) +
                " values, grid requires " +
                std::to_string(grid_.count(rank())));
  }
  check_finite();
}

int SampledFunction::rank() const {
  return grid_.dims() + (domain_ == Domain::lifted ? grid_.m : 0);
}

std::vector<int> SampledFunction::shape() const {
  return std::vector<int>(static_cast<std::size_t>(rank()),
                          grid_.samples_per_axis());
}

void SampledFunction::check_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
      throw Error("non-finite sample at flat index " + std::to_string(i));
    }
  }
}

void require_same_layout(const SampledFunction& a, const SampledFunction& b,
                         const char* what) {
  if (!(a.grid() == b.grid()) || a.domain() != b.domain()) {
    throw Error(std::string(what) + ": grid or domain mismatch");
  }
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& other) {
  require_same_layout(*this, other, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SampledFunction& SampledFunction::operator-=(const SampledFunction& other) {
  require_same_layout(*this, other, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SampledFunction& SampledFunction::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

SampledFunction operator+(SampledFunction a, const SampledFunction& b) {
  a += b;
  return a;
}

SampledFunction operator-(SampledFunction a, const SampledFunction& b) {
  a -= b;
  return a;
}

SampledFunction operator*(cplx s, SampledFunction a) {
  a *= s;
  return a;
}

SampledFunction abs(const SampledFunction& f) {
  SampledFunction out(f.grid(), f.domain());
  auto src = f.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::abs(src[i]);
  return out;
}

double max_abs(const SampledFunction& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

SampledFunction shifted(const SampledFunction& f, std::span<const int> offset) {
  const int rank = f.rank();
  if (static_cast<int>(offset.size()) != rank) {
    throw Error("shift offset rank mismatch");
  }
  const int N = f.grid().samples_per_axis();
  const auto st = strides(rank, N);
  SampledFunction out(f.grid(), f.domain());
  std::vector<int> idx(static_cast<std::size_t>(rank), 0);
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    std::size_t dst = 0;
    std::size_t rem = flat;
    for (int a = 0; a < rank; ++a) {
      const int i = static_cast<int>(rem / st[a]);
      rem %= st[a];
      const int j = ((i + offset[a]) % N + N) % N;
      dst += static_cast<std::size_t>(j) * st[a];
    }
    out[dst] = f[flat];
  }
  return out;
}

}  // namespace flaghp
