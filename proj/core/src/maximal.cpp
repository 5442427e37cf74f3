#include "flaghp/maximal.hpp"

#include <algorithm>
#include <cmath>

#include "flaghp/error.hpp"
#include "json.hpp"

namespace flaghp {
namespace {

struct Interval {
  int level;
  int offset;
};

std::vector<Interval> interval_options(const Grid& g, MaximalFamily family) {
  std::vector<Interval> out;
  for (int s = 0; s <= g.L; ++s) {
    out.push_back({s, 0});
    // A shifted whole-period block is the same set as the unshifted one.
    if (family == MaximalFamily::dyadic_shifted && s >= 1 && s < g.L) {
      out.push_back({s, 1 << (s - 1)});
    }
  }
  return out;
}

// Replaces every entry by the average over its block along `axis`.
std::vector<double> average_axis(const std::vector<double>& in, int D, int N, int axis,
                                 Interval iv) {
  std::size_t stride = 1;
  for (int a = D - 1; a > axis; --a) stride *= static_cast<std::size_t>(N);
  const std::size_t block = stride * static_cast<std::size_t>(N);
  const int b = 1 << iv.level;
  const double inv = 1.0 / b;
  std::vector<double> out(in.size());
  for (std::size_t base = 0; base < in.size(); base += block) {
    for (std::size_t s = 0; s < stride; ++s) {
      for (int t = 0; t < N / b; ++t) {
        const int start = iv.offset + t * b;
        double sum = 0.0;
        for (int q = 0; q < b; ++q) {
          sum += in[base + static_cast<std::size_t>((start + q) % N) * stride + s];
        }
        const double avg = sum * inv;
        for (int q = 0; q < b; ++q) {
          out[base + static_cast<std::size_t>((start + q) % N) * stride + s] = avg;
        }
      }
    }
  }
  return out;
}

struct Sweep {
  int D;
  int N;
  int span;
  bool cubes;
  const std::vector<Interval>* options;
  std::vector<double>* best;
  std::vector<int> chosen;

  void run(const std::vector<double>& cur, int axis) {
    if (axis == D) {
      for (std::size_t i = 0; i < cur.size(); ++i) (*best)[i] = std::max((*best)[i], cur[i]);
      return;
    }
    for (const Interval iv : *options) {
      if (cubes && axis > 0 && iv.level != chosen[0]) continue;
      bool ok = true;
      for (int a = 0; a < axis; ++a) {
        if (std::abs(iv.level - chosen[a]) > span) ok = false;
      }
      if (!ok) continue;
      chosen[axis] = iv.level;
      run(average_axis(cur, D, N, axis, iv), axis + 1);
    }
  }
};

SampledFunction sweep(const SampledFunction& f, const MaximalConfig& cfg, bool cubes) {
  const Grid& g = f.grid();
  if (f.domain() != Domain::base) throw Error("maximal operators act on base-domain functions");
  validate(cfg, g);
  const std::vector<Interval> options = interval_options(g, cfg.family);
  std::vector<double> absf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f[i]);
  std::vector<double> best(f.size(), 0.0);
  Sweep s{g.dims(), g.samples_per_axis(), cfg.max_scale_span < 0 ? g.L : cfg.max_scale_span,
          cubes, &options, &best, std::vector<int>(g.dims(), 0)};
  s.run(absf, 0);
  std::vector<cplx> out(best.begin(), best.end());
  return SampledFunction(g, Domain::base, std::move(out));
}

}  // namespace

const char* to_string(MaximalFamily f) {
  return f == MaximalFamily::dyadic ? "dyadic" : "dyadic-shifted";
}

MaximalFamily parse_maximal_family(const std::string& s) {
  if (s == "dyadic") return MaximalFamily::dyadic;
  if (s == "dyadic-shifted") return MaximalFamily::dyadic_shifted;
  throw ConfigError("unknown maximal family: " + s);
}

void validate(const MaximalConfig& cfg, const Grid& grid) {
  if (cfg.max_scale_span > grid.L) {
    throw ConfigError("maxScaleSpan " + std::to_string(cfg.max_scale_span) +
                      " exceeds L = " + std::to_string(grid.L));
  }
}

SampledFunction strong_maximal(const SampledFunction& f, const MaximalConfig& cfg) {
  return sweep(f, cfg, false);
}

SampledFunction hl_maximal(const SampledFunction& f, const MaximalConfig& cfg) {
  return sweep(f, cfg, true);
}

SampledSet::SampledSet(const Grid& grid) : grid_(grid), mask_(grid.size(), 0) {}

SampledSet::SampledSet(const Grid& grid, std::vector<std::uint8_t> mask)
    : grid_(grid), mask_(std::move(mask)) {
  if (mask_.size() != grid_.size()) throw Error("set mask size does not match grid");
  for (auto& v : mask_) {
    v = v ? 1 : 0;
    count_ += v;
  }
}

void SampledSet::insert(std::size_t i) {
  if (!mask_[i]) {
    mask_[i] = 1;
    ++count_;
  }
}

std::size_t SampledSet::count_in(std::span<const std::size_t> cells) const {
  std::size_t c = 0;
  for (std::size_t i : cells) c += mask_[i];
  return c;
}

bool SampledSet::subset_of(const SampledSet& other) const {
  if (!(grid_ == other.grid_)) return false;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i] && !other.mask_[i]) return false;
  }
  return true;
}

SampledFunction SampledSet::indicator() const {
  std::vector<cplx> v(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) v[i] = mask_[i] ? 1.0 : 0.0;
  return SampledFunction(grid_, Domain::base, std::move(v));
}

SampledSet superlevel(const SampledFunction& f, double t) {
  if (f.domain() != Domain::base) throw Error("superlevel expects a base-domain function");
  std::vector<std::uint8_t> mask(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) mask[i] = f[i].real() > t ? 1 : 0;
  return SampledSet(f.grid(), std::move(mask));
}

SampledSet enlarge(const SampledSet& set, const MaximalConfig& cfg, double threshold) {
  if (set.empty()) return SampledSet(set.grid());
  return superlevel(strong_maximal(set.indicator(), cfg), threshold);
}

SampledSet dilate(const SampledSet& set, std::span<const int> radius) {
  const Grid& g = set.grid();
  const int D = g.dims();
  const int N = g.samples_per_axis();
  if (static_cast<int>(radius.size()) != D) throw Error("dilate: radius rank mismatch");
  std::vector<std::uint8_t> cur(set.mask().begin(), set.mask().end());
  for (int axis = 0; axis < D; ++axis) {
    const int r = std::max(0, radius[axis]);
    if (r == 0) continue;
    std::size_t stride = 1;
    for (int a = D - 1; a > axis; --a) stride *= static_cast<std::size_t>(N);
    const std::size_t block = stride * static_cast<std::size_t>(N);
    std::vector<std::uint8_t> next(cur.size(), 0);
    for (std::size_t base = 0; base < cur.size(); base += block) {
      for (std::size_t s = 0; s < stride; ++s) {
        for (int i = 0; i < N; ++i) {
          if (!cur[base + static_cast<std::size_t>(i) * stride + s]) continue;
          if (2 * r + 1 >= N) {
            for (int q = 0; q < N; ++q) next[base + static_cast<std::size_t>(q) * stride + s] = 1;
            break;
          }
          for (int d = -r; d <= r; ++d) {
            const int q = ((i + d) % N + N) % N;
            next[base + static_cast<std::size_t>(q) * stride + s] = 1;
          }
        }
      }
    }
    cur.swap(next);
  }
  return SampledSet(g, std::move(cur));
}

std::vector<std::uint64_t> run_lengths(const SampledSet& set) {
  std::vector<std::uint64_t> runs;
  std::uint8_t cur = 0;
  std::uint64_t len = 0;
  for (const std::uint8_t v : set.mask()) {
    if (v == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = v;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

SampledSet from_run_lengths(const Grid& grid, std::span<const std::uint64_t> runs) {
  std::vector<std::uint8_t> mask;
  mask.reserve(grid.size());
  std::uint8_t cur = 0;
  for (const std::uint64_t r : runs) {
    if (mask.size() + r > grid.size()) throw IoError("run lengths overflow the grid");
    mask.insert(mask.end(), r, cur);
    cur ^= 1;
  }
  if (mask.size() != grid.size()) throw IoError("run lengths do not cover the grid");
  return SampledSet(grid, std::move(mask));
}

std::string set_to_json(const SampledSet& set) {
  nlohmann::ordered_json j;
  j["format"] = "flaghp-set";
  j["version"] = 1;
  j["grid"] = {{"n", set.grid().n}, {"m", set.grid().m}, {"L", set.grid().L},
               {"side", set.grid().side}};
  j["count"] = set.count();
  j["measure"] = set.measure();
  j["runs"] = run_lengths(set);
  return j.dump();
}

SampledSet set_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& g = j.at("grid");
    const Grid grid = make_grid(g.at("n").get<int>(), g.at("m").get<int>(), g.at("L").get<int>(),
                                g.at("side").get<double>());
    const auto runs = j.at("runs").get<std::vector<std::uint64_t>>();
    SampledSet s = from_run_lengths(grid, runs);
    if (s.count() != j.at("count").get<std::size_t>()) throw IoError("set count mismatch");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad set record: ") + e.what());
  }
}

}  // namespace flaghp
