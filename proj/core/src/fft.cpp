#include "flaghp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "flaghp/error.hpp"

namespace flaghp::fft {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
// Plans are cached per (shape, direction, alignment) and never destroyed.
using PlanKey = std::tuple<std::vector<int>, int, int>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(std::span<cplx> data, std::span<const int> shape, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  PlanKey key{std::vector<int>(shape.begin(), shape.end()), sign,
              fftw_alignment_of(reinterpret_cast<double*>(ptr))};
  std::lock_guard lock(planner_mutex());
  static std::map<PlanKey, fftw_plan> cache;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  fftw_plan p = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), ptr,
                              ptr, sign, FFTW_ESTIMATE);
  if (p == nullptr) throw Error("FFTW failed to create a plan");
  cache.emplace(std::move(key), p);
  return p;
}

void run(std::span<cplx> data, std::span<const int> shape, int sign) {
  std::size_t total = 1;
  for (int s : shape) total *= static_cast<std::size_t>(s);
  if (total != data.size()) throw Error("fft: shape does not match buffer");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(data, shape, sign), ptr, ptr);
}

}  // namespace

void forward(std::span<cplx> data, std::span<const int> shape) {
  run(data, shape, FFTW_FORWARD);
}

void inverse(std::span<cplx> data, std::span<const int> shape) {
  run(data, shape, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

std::vector<cplx> spectrum(const SampledFunction& f) {
  std::vector<cplx> out(f.values().begin(), f.values().end());
  const auto shape = f.shape();
  forward(out, shape);
  return out;
}

SampledFunction from_spectrum(const Grid& grid, Domain domain,
                              std::vector<cplx> spec) {
  const int rank = grid.dims() + (domain == Domain::lifted ? grid.m : 0);
  const std::vector<int> shape(static_cast<std::size_t>(rank), grid.samples_per_axis());
  inverse(spec, shape);
  return SampledFunction(grid, domain, std::move(spec));
}

}  // namespace flaghp::fft
