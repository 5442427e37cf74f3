#include "flaghp/ops.hpp"

#include <cmath>

#include "flaghp/error.hpp"
#include "flaghp/fft.hpp"

namespace flaghp {

SampledFunction convolve(const SampledFunction& f, const SampledFunction& g) {
  require_same_layout(f, g, "convolve");
  auto fs = fft::spectrum(f);
  const auto gs = fft::spectrum(g);
  const double dv = f.cell_volume();
  for (std::size_t i = 0; i < fs.size(); ++i) fs[i] *= gs[i] * dv;
  return fft::from_spectrum(f.grid(), f.domain(), std::move(fs));
}

double lp_norm_pow(const SampledFunction& f, double p) {
  if (!(p > 0.0)) throw ConfigError("lp_norm requires p > 0");
  double acc = 0.0;
  if (p == 2.0) {
    for (const auto& v : f.values()) acc += std::norm(v);
  } else if (p == 1.0) {
    for (const auto& v : f.values()) acc += std::abs(v);
  } else {
    for (const auto& v : f.values()) acc += std::pow(std::abs(v), p);
  }
  return acc * f.cell_volume();
}

double lp_norm(const SampledFunction& f, double p) {
  return std::pow(lp_norm_pow(f, p), 1.0 / p);
}

cplx inner(const SampledFunction& f, const SampledFunction& g) {
  require_same_layout(f, g, "inner");
  cplx acc{};
  auto a = f.values();
  auto b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc * f.cell_volume();
}

namespace {

template <typename T>
SampledFunction multiply(const SampledFunction& f, std::span<const T> mult) {
  if (mult.size() != f.size()) throw Error("multiplier size mismatch");
  auto s = fft::spectrum(f);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= mult[i];
  return fft::from_spectrum(f.grid(), f.domain(), std::move(s));
}

}  // namespace

SampledFunction apply_multiplier(const SampledFunction& f,
                                 std::span<const double> multiplier) {
  return multiply(f, multiplier);
}

SampledFunction apply_multiplier(const SampledFunction& f,
                                 std::span<const cplx> multiplier) {
  return multiply(f, multiplier);
}

std::vector<cplx> central_difference(std::span<const cplx> values,
                                     std::span<const int> shape, int axis,
                                     int order, double h) {
  const int rank = static_cast<int>(shape.size());
  if (axis < 0 || axis >= rank) throw Error("central_difference: bad axis");
  std::size_t stride = 1;
  for (int a = rank - 1; a > axis; --a) stride *= static_cast<std::size_t>(shape[a]);
  const std::size_t len = static_cast<std::size_t>(shape[axis]);
  const std::size_t block = stride * len;
  std::vector<cplx> cur(values.begin(), values.end());
  std::vector<cplx> next(cur.size());
  const double inv = 1.0 / (2.0 * h);
  for (int q = 0; q < order; ++q) {
    for (std::size_t base = 0; base < cur.size(); base += block) {
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t ip = (i + 1) % len;
        const std::size_t im = (i + len - 1) % len;
        for (std::size_t s = 0; s < stride; ++s) {
          next[base + i * stride + s] =
              (cur[base + ip * stride + s] - cur[base + im * stride + s]) * inv;
        }
      }
    }
    cur.swap(next);
  }
  return cur;
}

std::vector<cplx> trig_upsample(std::span<const cplx> values, int rank, int n, int factor) {
  if (rank < 1 || n < 1 || factor < 1) throw Error("trig_upsample: bad shape");
  const std::vector<int> shape(rank, n);
  std::vector<cplx> spec(values.begin(), values.end());
  if (spec.size() != static_cast<std::size_t>(std::pow(n, rank))) throw Error("trig_upsample: size mismatch");
  fft::forward(spec, shape);
  if (factor == 1) {
    fft::inverse(spec, shape);
    return spec;
  }
  const int M = n * factor;
  std::size_t total = 1;
  for (int a = 0; a < rank; ++a) total *= static_cast<std::size_t>(M);
  std::vector<cplx> fine(total, cplx(0.0, 0.0));
  const double gain = std::pow(static_cast<double>(factor), rank);
  std::vector<int> k(rank);
  for (std::size_t src = 0; src < spec.size(); ++src) {
    std::size_t rem = src;
    int nyquist_axes = 0;
    for (int a = rank - 1; a >= 0; --a) {
      k[a] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
      if (n % 2 == 0 && k[a] == n / 2) ++nyquist_axes;
    }
    // Every Nyquist axis doubles the number of targets.
    const int targets = 1 << nyquist_axes;
    const cplx v = spec[src] * (gain / targets);
    for (int t = 0; t < targets; ++t) {
      std::size_t dst = 0;
      int bit = 0;
      for (int a = 0; a < rank; ++a) {
        int s = k[a] <= n / 2 ? k[a] : k[a] - n;
        if (n % 2 == 0 && k[a] == n / 2 && ((t >> bit++) & 1)) s = -s;
        dst = dst * static_cast<std::size_t>(M) + static_cast<std::size_t>((s + M) % M);
      }
      fine[dst] += v;
    }
  }
  std::vector<int> fine_shape(rank, M);
  fft::inverse(fine, fine_shape);
  return fine;
}

}  // namespace flaghp
