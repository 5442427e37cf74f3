#include "flaghp/signal.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "flaghp/error.hpp"
#include "flaghp/fft.hpp"
#include "flaghp/filter_bank.hpp"
#include "flaghp/ops.hpp"

namespace flaghp {
namespace {

constexpr struct {
  SignalKind kind;
  const char* name;
} kKindNames[] = {
    {SignalKind::gaussian_bump, "gaussian-bump"},
    {SignalKind::tensor_oscillation, "tensor-oscillation"},
    {SignalKind::band_limited_random, "band-limited-random"},
    {SignalKind::indicator_smooth, "indicator-smooth"},
    {SignalKind::delta, "delta"},
};

std::vector<double> per_axis(const std::vector<double>& v, int dims,
                             double fallback, const char* what) {
  if (v.empty()) return std::vector<double>(static_cast<std::size_t>(dims), fallback);
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(dims), v[0]);
  if (static_cast<int>(v.size()) != dims) {
    throw ConfigError(std::string("signal parameter '") + what +
                      "' needs 1 or n+m entries");
  }
  return v;
}

double wrap(double d, double side) {
  return d - side * std::floor(d / side + 0.5);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad number in signal spec: '" + item + "'");
    }
  }
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    if (i) out += ',';
    out += buf;
  }
  return out;
}

// Evaluates a separable real profile on every sample.
template <typename AxisFn>
SampledFunction separable(const Grid& grid, AxisFn&& axis_value) {
  const int D = grid.dims();
  const int N = grid.samples_per_axis();
  std::vector<std::vector<double>> table(static_cast<std::size_t>(D));
  for (int a = 0; a < D; ++a) {
    table[a].resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) table[a][i] = axis_value(a, i * grid.spacing());
  }
  SampledFunction f(grid);
  const auto st = strides(D, N);
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    double v = 1.0;
    std::size_t rem = flat;
    for (int a = 0; a < D; ++a) {
      v *= table[a][rem / st[a]];
      rem %= st[a];
    }
    f[flat] = v;
  }
  return f;
}

SampledFunction band_limited_random(const SignalSpec& s, const Grid& grid) {
  const int D = grid.dims();
  const int N = grid.samples_per_axis();
  const double nyquist = N / (2.0 * grid.side);
  if (!(s.band_hi > 0.0) || s.band_lo < 0.0 || s.band_lo > s.band_hi) {
    throw ConfigError("band-limited-random needs 0 <= band_lo <= band_hi, band_hi > 0");
  }
  if (s.band_hi >= nyquist) {
    throw ConfigError("band-limited-random band exceeds the grid Nyquist frequency");
  }
  const bool has_band2 = s.band2_hi > 0.0;
  // Enumerate integer frequency vectors in a resolution-independent order.
  const int H = static_cast<int>(std::ceil(s.band_hi * grid.side));
  std::vector<int> r(static_cast<std::size_t>(D), -H);
  std::vector<cplx> spec(grid.size(), cplx{});
  const auto st = strides(D, N);
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto flat_of = [&](const std::vector<int>& v, int sign) {
    std::size_t flat = 0;
    for (int a = 0; a < D; ++a) {
      flat += static_cast<std::size_t>(((sign * v[a]) % N + N) % N) * st[a];
    }
    return flat;
  };
  for (;;) {
    // Canonical half-space: first nonzero component positive.
    int first = 0;
    for (int v : r) {
      if (v != 0) {
        first = v;
        break;
      }
    }
    if (first > 0) {
      double rad2 = 0.0;
      double rad2_second = 0.0;
      for (int a = 0; a < D; ++a) {
        const double xi = r[a] / grid.side;
        rad2 += xi * xi;
        if (a >= grid.n) rad2_second += xi * xi;
      }
      const double rad = std::sqrt(rad2);
      const double rad_second = std::sqrt(rad2_second);
      const double re = normal(rng);
      const double im = normal(rng);
      const bool in_band = rad >= s.band_lo && rad <= s.band_hi &&
                           (!has_band2 || (rad_second >= s.band2_lo &&
                                           rad_second <= s.band2_hi));
      if (in_band) {
        spec[flat_of(r, 1)] = cplx(re, im);
        spec[flat_of(r, -1)] = cplx(re, -im);
      }
    }
    int a = D - 1;
    while (a >= 0 && r[a] == H) r[a--] = -H;
    if (a < 0) break;
    ++r[a];
  }
  SampledFunction f = fft::from_spectrum(grid, Domain::base, std::move(spec));
  for (auto& v : f.values()) v = v.real();
  const double norm = lp_norm(f, 2.0);
  if (norm == 0.0) throw ConfigError("band-limited-random band contains no grid frequency");
  f *= s.amplitude / norm;
  return f;
}

}  // namespace

const char* to_string(SignalKind k) {
  for (const auto& e : kKindNames) {
    if (e.kind == k) return e.name;
  }
  return "?";
}

SignalKind parse_signal_kind(const std::string& s) {
  for (const auto& e : kKindNames) {
    if (s == e.name) return e.kind;
  }
  throw ConfigError("unknown signal kind '" + s + "'");
}

SignalSpec parse_signal_spec(const std::string& text) {
  std::stringstream ss(text);
  std::string field;
  SignalSpec spec;
  bool first = true;
  while (std::getline(ss, field, ';')) {
    if (first) {
      spec.kind = parse_signal_kind(field);
      first = false;
      continue;
    }
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ConfigError("signal field without '=': " + field);
    const std::string key = field.substr(0, eq);
    const auto vals = parse_list(field.substr(eq + 1));
    auto need = [&](std::size_t k) {
      if (vals.size() != k) throw ConfigError("signal field '" + key + "' has wrong arity");
    };
    if (key == "center") {
      spec.center = vals;
    } else if (key == "widths") {
      spec.widths = vals;
    } else if (key == "frequency") {
      spec.frequency = vals;
    } else if (key == "band") {
      need(2);
      spec.band_lo = vals[0];
      spec.band_hi = vals[1];
    } else if (key == "band2") {
      need(2);
      spec.band2_lo = vals[0];
      spec.band2_hi = vals[1];
    } else if (key == "seed") {
      need(1);
      spec.seed = static_cast<std::uint64_t>(vals[0]);
    } else if (key == "amplitude") {
      need(1);
      spec.amplitude = vals[0];
    } else {
      throw ConfigError("unknown signal field '" + key + "'");
    }
  }
  if (first) throw ConfigError("empty signal spec");
  return spec;
}

std::string format_signal_spec(const SignalSpec& s) {
  std::string out = to_string(s.kind);
  if (!s.center.empty()) out += ";center=" + fmt_list(s.center);
  if (!s.widths.empty()) out += ";widths=" + fmt_list(s.widths);
  if (!s.frequency.empty()) out += ";frequency=" + fmt_list(s.frequency);
  if (s.band_hi > 0.0) out += ";band=" + fmt_list({s.band_lo, s.band_hi});
  if (s.band2_hi > 0.0) out += ";band2=" + fmt_list({s.band2_lo, s.band2_hi});
  if (s.kind == SignalKind::band_limited_random) {
    out += ";seed=" + std::to_string(s.seed);
  }
  if (s.amplitude != 1.0) out += ";amplitude=" + fmt_list({s.amplitude});
  return out;
}

SampledFunction synthesize(const SignalSpec& s, const Grid& grid) {
  const int D = grid.dims();
  const double h = grid.spacing();
  const auto center = per_axis(s.center, D, grid.side / 2.0, "center");
  switch (s.kind) {
    case SignalKind::gaussian_bump: {
      const auto w = per_axis(s.widths, D, 0.0, "widths");
      for (double v : w) {
        if (v < h) throw ConfigError("gaussian-bump width below one cell");
      }
      SampledFunction f = separable(grid, [&](int a, double x) {
        const double d = wrap(x - center[a], grid.side);
        double acc = 0.0;
        for (int img = -2; img <= 2; ++img) {
          const double t = (d + img * grid.side) / w[a];
          acc += std::exp(-0.5 * t * t);
        }
        return acc / (std::sqrt(2.0 * std::numbers::pi) * w[a]);
      });
      f *= s.amplitude;
      return f;
    }
    case SignalKind::tensor_oscillation: {
      const auto w = per_axis(s.widths, D, 0.0, "widths");
      const auto fr = per_axis(s.frequency, D, 0.0, "frequency");
      const double nyquist = grid.samples_per_axis() / (2.0 * grid.side);
      for (int a = 0; a < D; ++a) {
        if (w[a] < h) throw ConfigError("tensor-oscillation width below one cell");
        if (std::abs(fr[a]) >= nyquist) {
          throw ConfigError("tensor-oscillation frequency beyond Nyquist");
        }
      }
      SampledFunction f = separable(grid, [&](int a, double x) {
        const double d = wrap(x - center[a], grid.side);
        const double t = d / w[a];
        return std::cos(2.0 * std::numbers::pi * fr[a] * d) * std::exp(-0.5 * t * t);
      });
      f *= s.amplitude;
      return f;
    }
    case SignalKind::band_limited_random:
      return band_limited_random(s, grid);
    case SignalKind::indicator_smooth: {
      const auto w = per_axis(s.widths, D, 0.0, "widths");
      for (double v : w) {
        if (v < 4.0 * h) throw ConfigError("indicator-smooth half-width below four cells");
      }
      SampledFunction f = separable(grid, [&](int a, double x) {
        const double d = std::abs(wrap(x - center[a], grid.side));
        const double ramp = w[a] / 4.0;
        return 1.0 - smooth_step((d - (w[a] - ramp)) / ramp);
      });
      f *= s.amplitude;
      return f;
    }
    case SignalKind::delta: {
      SampledFunction f(grid);
      const int N = grid.samples_per_axis();
      const auto st = strides(D, N);
      std::size_t flat = 0;
      for (int a = 0; a < D; ++a) {
        const long i = std::lround(center[a] / h);
        flat += static_cast<std::size_t>(((i % N) + N) % N) * st[a];
      }
      f[flat] = s.amplitude / grid.cell_volume();
      return f;
    }
  }
  throw ConfigError("unhandled signal kind");
}

}  // namespace flaghp
