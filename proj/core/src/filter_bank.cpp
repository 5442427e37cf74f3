#include "flaghp/filter_bank.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "flaghp/error.hpp"
#include "flaghp/fft.hpp"
#include "flaghp/io.hpp"
#include "flaghp/ops.hpp"
#include "json.hpp"

namespace flaghp {
namespace {

// 10-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {
    0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
    0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kGlWeights = {
    0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513491505806, 0.0666713443086881};
constexpr int kPanels = 8;

double bump(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return std::exp(-1.0 / (s * (1.0 - s)));
}

double bump_integral(double a, double b) {
  const double h = (b - a) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    double acc = 0.0;
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
      acc += kGlWeights[q] * (bump(mid - half * kGlNodes[q]) + bump(mid + half * kGlNodes[q]));
    }
    total += acc * half;
  }
  return total;
}

double bump_total() {
  static const double total = 2.0 * bump_integral(0.0, 0.5);
  return total;
}

// Frequency-domain bank parameters. Window j of the meyer profile rises on
// log2|xi| in [j, j+1] and falls on [j+1, j+2].
constexpr double kC1 = 1.0;
constexpr double kC2 = 4.0;
constexpr int kDerivativeOrders = 2;

double window(Profile profile, double radius, int scale) {
  if (radius <= 0.0) return 0.0;
  const double t = std::log2(radius) - scale;
  if (profile == Profile::shannon_sharp) {
    return (t >= 0.5 && t < 1.5) ? 1.0 : 0.0;
  }
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (t <= 0.0 || t >= 2.0) return 0.0;
  if (t <= 1.0) return std::sin(half_pi * smooth_step(t));
  return std::cos(half_pi * smooth_step(t - 1.0));
}

// Radius |xi| in cycles per unit for every flat index of an `axes`-dim cube.
std::vector<double> radii(const Grid& g, int axes) {
  const int N = g.samples_per_axis();
  const std::size_t total = g.count(axes);
  std::vector<double> out(total);
  std::vector<int> idx(axes, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double r2 = 0.0;
    for (int a = 0; a < axes; ++a) {
      const double f = frequency(g, idx[a]);
      r2 += f * f;
    }
    out[flat] = std::sqrt(r2);
    for (int a = axes - 1; a >= 0; --a) {
      if (++idx[a] < N) break;
      idx[a] = 0;
    }
  }
  return out;
}

void check_range(const Grid& g, ScaleRange r, const char* name) {
  if (r.hi < r.lo) {
    throw ConfigError(std::string("empty scale range for ") + name);
  }
  const double nyquist = g.samples_per_axis() / (2.0 * g.side);
  if (kC2 * std::ldexp(1.0, r.hi) > nyquist) {
    throw ConfigError(std::string(name) + " range top " + std::to_string(r.hi) +
                      " exceeds the Nyquist limit of the grid (need " +
                      std::to_string(kC2) + "*2^hi <= " + std::to_string(nyquist) + ")");
  }
}

int snapped_cells(const Grid& g, double length) {
  const double cells = length / g.spacing();
  const int e = static_cast<int>(std::lround(std::log2(cells)));
  const int clamped = std::clamp(e, 0, g.L);
  return 1 << clamped;
}

// sup |D^q kernel| over every axis, for q = 0..kDerivativeOrders. The
// kernels are trigonometric polynomials, so the derivatives are taken
// exactly on the spectrum: finite differences lose most of the top band
// near the Nyquist frequency and would make the constant depend on L.
std::array<double, kDerivativeOrders + 1> derivative_sups(std::span<const double> win,
                                                          int axes, const Grid& g) {
  const int N = g.samples_per_axis();
  const std::vector<int> shape(axes, N);
  const double inv_dv = 1.0 / g.cell_volume(axes);
  std::array<double, kDerivativeOrders + 1> out{};
  std::vector<cplx> data(win.size());
  for (int a = 0; a < axes; ++a) {
    std::size_t stride = 1;
    for (int b = axes - 1; b > a; --b) stride *= static_cast<std::size_t>(N);
    for (int q = (a == 0 ? 0 : 1); q <= kDerivativeOrders; ++q) {
      for (std::size_t i = 0; i < win.size(); ++i) {
        const int idx = static_cast<int>((i / stride) % static_cast<std::size_t>(N));
        const cplx w(0.0, 2.0 * std::numbers::pi * frequency(g, idx));
        data[i] = win[i] * std::pow(w, q);
      }
      fft::inverse(data, shape);
      double sup = 0.0;
      for (const cplx& z : data) sup = std::max(sup, std::abs(z) * inv_dv);
      out[static_cast<std::size_t>(q)] = std::max(out[static_cast<std::size_t>(q)], sup);
    }
  }
  return out;
}

}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (t > 0.5) return 1.0 - smooth_step(1.0 - t);
  return bump_integral(0.0, t) / bump_total();
}

const char* to_string(Profile p) {
  return p == Profile::meyer_smooth ? "meyer-smooth" : "shannon-sharp";
}

Profile parse_profile(const std::string& s) {
  if (s == "meyer-smooth" || s == "meyer") return Profile::meyer_smooth;
  if (s == "shannon-sharp" || s == "shannon") return Profile::shannon_sharp;
  throw ConfigError("unknown filter profile: " + s);
}

TileShape tile_shape(const Grid& grid, ScalePair sp) {
  TileShape t;
  t.cells_i = snapped_cells(grid, std::ldexp(1.0, -sp.j));
  t.cells_j = snapped_cells(grid, std::ldexp(1.0, -std::min(sp.j, sp.k)));
  t.side_i = t.cells_i * grid.spacing();
  t.side_j = t.cells_j * grid.spacing();
  return t;
}

std::span<const double> FilterBank::psi1(int j) const {
  if (!j_range_.contains(j)) throw ConfigError("first-factor scale out of range: " + std::to_string(j));
  return psi1_[static_cast<std::size_t>(j - j_range_.lo)];
}

std::span<const double> FilterBank::psi2(int k) const {
  if (!k_range_.contains(k)) throw ConfigError("second-factor scale out of range: " + std::to_string(k));
  return psi2_[static_cast<std::size_t>(k - k_range_.lo)];
}

std::vector<ScalePair> FilterBank::scale_pairs() const {
  std::vector<ScalePair> out;
  for (int j = j_range_.lo; j <= j_range_.hi; ++j) {
    for (int k = k_range_.lo; k <= k_range_.hi; ++k) out.push_back({j, k});
  }
  return out;
}

double FilterBank::per_pair_constant(ScalePair sp) const {
  if (!contains(sp)) throw ConfigError("scale pair out of range");
  const std::size_t idx = static_cast<std::size_t>(sp.j - j_range_.lo) * k_range_.count() +
                          static_cast<std::size_t>(sp.k - k_range_.lo);
  return pair_constants_[idx];
}

void FilterBank::compute_kernel_constants() {
  const int full = grid_.dims();
  std::vector<std::array<double, kDerivativeOrders + 1>> d1, d2;
  for (const auto& w : psi1_) d1.push_back(derivative_sups(w, full, grid_));
  for (const auto& w : psi2_) d2.push_back(derivative_sups(w, grid_.m, grid_));

  pair_constants_.clear();
  kernel_constant_ = 0.0;
  for (const ScalePair sp : scale_pairs()) {
    const TileShape t = tile_shape(grid_, sp);
    const auto& a = d1[static_cast<std::size_t>(sp.j - j_range_.lo)];
    const auto& b = d2[static_cast<std::size_t>(sp.k - k_range_.lo)];
    // |R#| = |I| |I^| |J|
    const double vol = std::pow(t.side_i, grid_.n + grid_.m) * std::pow(t.side_j, grid_.m);
    double c = a[0] * b[0];
    for (int q = 1; q <= kDerivativeOrders; ++q) {
      c = std::max(c, a[q] * b[0] * std::pow(t.side_i, q));
      c = std::max(c, a[0] * b[q] * std::pow(t.side_j, q));
    }
    pair_constants_.push_back(vol * c);
    kernel_constant_ = std::max(kernel_constant_, vol * c);
  }
}

FilterBank FilterBank::from_windows(const Grid& grid, ScaleRange jr, ScaleRange kr,
                                    Profile profile, int moment_order,
                                    std::vector<std::vector<double>> psi1,
                                    std::vector<std::vector<double>> psi2,
                                    std::vector<double> residual1,
                                    std::vector<double> residual2,
                                    std::vector<double> residual) {
  if (jr.hi < jr.lo || kr.hi < kr.lo) throw ConfigError("empty scale range");
  const std::size_t full = grid.size();
  const std::size_t second = grid.count(grid.m);
  auto check = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("filter bank window size mismatch: ") + what);
  };
  check(psi1.size() == static_cast<std::size_t>(jr.count()), "psi1 count");
  check(psi2.size() == static_cast<std::size_t>(kr.count()), "psi2 count");
  for (const auto& w : psi1) check(w.size() == full, "psi1");
  for (const auto& w : psi2) check(w.size() == second, "psi2");
  check(residual1.size() == full, "residual1");
  check(residual2.size() == second, "residual2");
  check(residual.size() == full, "residual");

  FilterBank b;
  b.grid_ = grid;
  b.j_range_ = jr;
  b.k_range_ = kr;
  b.profile_ = profile;
  b.moment_order_ = moment_order;
  b.c1_ = kC1;
  b.c2_ = kC2;
  b.psi1_ = std::move(psi1);
  b.psi2_ = std::move(psi2);
  b.residual1_ = std::move(residual1);
  b.residual2_ = std::move(residual2);
  b.residual_ = std::move(residual);
  b.compute_kernel_constants();
  return b;
}

int default_moment_order(const Grid& grid, double p) {
  if (!(p > 0.0)) throw ConfigError("p must be positive");
  return static_cast<int>(std::ceil((2.0 / p - 0.5) * std::max(grid.n, grid.m)));
}

FilterBank build_filter_bank(const Grid& grid, ScaleRange j_range, ScaleRange k_range,
                             Profile profile, int moment_order) {
  check_range(grid, j_range, "first-factor");
  check_range(grid, k_range, "second-factor");
  if (moment_order < 0) throw ConfigError("moment order must be nonnegative");

  const std::vector<double> r1 = radii(grid, grid.dims());
  const std::vector<double> r2 = radii(grid, grid.m);

  std::vector<std::vector<double>> psi1, psi2;
  std::vector<double> s1(r1.size(), 0.0), s2(r2.size(), 0.0);
  for (int j = j_range.lo; j <= j_range.hi; ++j) {
    std::vector<double> w(r1.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
      w[i] = window(profile, r1[i], j);
      s1[i] += w[i] * w[i];
    }
    psi1.push_back(std::move(w));
  }
  for (int k = k_range.lo; k <= k_range.hi; ++k) {
    std::vector<double> w(r2.size());
    for (std::size_t i = 0; i < r2.size(); ++i) {
      w[i] = window(profile, r2[i], k);
      s2[i] += w[i] * w[i];
    }
    psi2.push_back(std::move(w));
  }

  const std::size_t second = r2.size();
  std::vector<double> res1(r1.size()), res2(second), res(r1.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    res1[i] = std::max(0.0, 1.0 - s1[i]);
    res[i] = std::max(0.0, 1.0 - s1[i] * s2[i % second]);
  }
  for (std::size_t i = 0; i < second; ++i) res2[i] = std::max(0.0, 1.0 - s2[i]);

  return FilterBank::from_windows(grid, j_range, k_range, profile, moment_order,
                                  std::move(psi1), std::move(psi2), std::move(res1),
                                  std::move(res2), std::move(res));
}

std::vector<double> flag_kernel_spectrum(const FilterBank& bank, ScalePair sp) {
  const auto w1 = bank.psi1(sp.j);
  const auto w2 = bank.psi2(sp.k);
  const std::size_t second = w2.size();
  std::vector<double> out(w1.size());
  for (std::size_t i = 0; i < w1.size(); ++i) out[i] = w1[i] * w2[i % second];
  return out;
}

SampledFunction kernel_space_side(const FilterBank& bank, ScalePair sp) {
  const auto m = flag_kernel_spectrum(bank, sp);
  std::vector<cplx> spec(m.begin(), m.end());
  SampledFunction k = fft::from_spectrum(bank.grid(), Domain::base, std::move(spec));
  k *= cplx(1.0 / bank.grid().cell_volume(), 0.0);
  return k;
}

IdentityCheck check_resolution_identity_detail(const FilterBank& bank) {
  const Grid& g = bank.grid();
  const std::size_t full = g.size();
  const std::size_t second = g.count(g.m);
  IdentityCheck out;

  std::size_t worst = 0, worst_first = 0, worst_second = 0;
  for (std::size_t i = 0; i < full; ++i) {
    double sum = bank.residual()[i];
    double first = bank.residual1()[i];
    for (int j = bank.j_range().lo; j <= bank.j_range().hi; ++j) {
      const double a = bank.psi1(j)[i];
      first += a * a;
      for (int k = bank.k_range().lo; k <= bank.k_range().hi; ++k) {
        const double v = a * bank.psi2(k)[i % second];
        sum += v * v;
      }
    }
    const double dev = std::abs(sum - 1.0);
    if (dev > out.product) {
      out.product = dev;
      worst = i;
    }
    if (std::abs(first - 1.0) > out.first) {
      out.first = std::abs(first - 1.0);
      worst_first = i;
    }
  }
  for (std::size_t i = 0; i < second; ++i) {
    double s = bank.residual2()[i];
    for (int k = bank.k_range().lo; k <= bank.k_range().hi; ++k) {
      const double b = bank.psi2(k)[i];
      s += b * b;
    }
    if (std::abs(s - 1.0) > out.second) {
      out.second = std::abs(s - 1.0);
      worst_second = i;  // the trailing axes come last, so this is also a full index
    }
  }
  out.deviation = std::max({out.product, out.first, out.second});
  if (out.deviation > out.product) worst = out.first >= out.second ? worst_first : worst_second;

  const int N = g.samples_per_axis();
  out.worst_index.assign(g.dims(), 0);
  out.worst_frequency.assign(g.dims(), 0.0);
  std::size_t rem = worst;
  for (int a = g.dims() - 1; a >= 0; --a) {
    out.worst_index[a] = static_cast<int>(rem % N);
    out.worst_frequency[a] = frequency(g, out.worst_index[a]);
    rem /= N;
  }
  return out;
}

double check_resolution_identity(const FilterBank& bank) {
  return check_resolution_identity_detail(bank).deviation;
}

std::string bank_descriptor_json(const FilterBank& bank) {
  nlohmann::ordered_json j;
  j["format"] = "flaghp-filter-bank";
  j["version"] = 1;
  j["grid"] = {{"n", bank.grid().n}, {"m", bank.grid().m}, {"L", bank.grid().L},
               {"side", bank.grid().side}};
  j["profile"] = to_string(bank.profile());
  j["j_range"] = {bank.j_range().lo, bank.j_range().hi};
  j["k_range"] = {bank.k_range().lo, bank.k_range().hi};
  j["c1"] = bank.c1();
  j["c2"] = bank.c2();
  j["moment_order"] = bank.moment_order();
  j["kernel_constant"] = bank.kernel_constant();
  return j.dump(2);
}

FilterBank bank_from_descriptor(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
    const auto& g = j.at("grid");
    const Grid grid = make_grid(g.at("n").get<int>(), g.at("m").get<int>(),
                                g.at("L").get<int>(), g.at("side").get<double>());
    const ScaleRange jr{j.at("j_range").at(0).get<int>(), j.at("j_range").at(1).get<int>()};
    const ScaleRange kr{j.at("k_range").at(0).get<int>(), j.at("k_range").at(1).get<int>()};
    return build_filter_bank(grid, jr, kr, parse_profile(j.at("profile").get<std::string>()),
                             j.at("moment_order").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad filter bank descriptor: ") + e.what());
  }
}

namespace {
constexpr char kWindowsMagic[4] = {'F', 'L', 'G', 'W'};
}

void save_bank(const std::filesystem::path& dir, const FilterBank& bank) {
  io::write_text(dir / "bank.json", bank_descriptor_json(bank));
  std::string buf(kWindowsMagic, 4);
  io::append_u32(buf, static_cast<std::uint32_t>(bank.j_range().count()));
  io::append_u32(buf, static_cast<std::uint32_t>(bank.k_range().count()));
  auto put = [&](std::span<const double> w) {
    for (double v : w) io::append_f64(buf, v);
  };
  for (int j = bank.j_range().lo; j <= bank.j_range().hi; ++j) put(bank.psi1(j));
  for (int k = bank.k_range().lo; k <= bank.k_range().hi; ++k) put(bank.psi2(k));
  put(bank.residual1());
  put(bank.residual2());
  put(bank.residual());
  io::write_text(dir / "windows.bin", buf);
}

FilterBank load_bank(const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(dir / "bank.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad bank.json: ") + e.what());
  }
  Grid grid;
  ScaleRange jr, kr;
  Profile profile;
  int order;
  try {
    const auto& g = j.at("grid");
    grid = make_grid(g.at("n").get<int>(), g.at("m").get<int>(), g.at("L").get<int>(),
                     g.at("side").get<double>());
    jr = {j.at("j_range").at(0).get<int>(), j.at("j_range").at(1).get<int>()};
    kr = {j.at("k_range").at(0).get<int>(), j.at("k_range").at(1).get<int>()};
    profile = parse_profile(j.at("profile").get<std::string>());
    order = j.at("moment_order").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad bank.json: ") + e.what());
  }

  const std::string buf = io::read_text(dir / "windows.bin");
  if (buf.size() < 12 || buf.compare(0, 4, std::string(kWindowsMagic, 4)) != 0) {
    throw IoError("windows.bin: bad magic");
  }
  if (io::read_u32_at(buf, 4) != static_cast<std::uint32_t>(jr.count()) ||
      io::read_u32_at(buf, 8) != static_cast<std::uint32_t>(kr.count())) {
    throw IoError("windows.bin: window counts disagree with bank.json");
  }
  std::size_t off = 12;
  auto take = [&](std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i, off += 8) {
      w[i] = io::read_f64_at(buf, off);
      if (!std::isfinite(w[i])) throw IoError("windows.bin: non-finite window value");
    }
    return w;
  };
  const std::size_t full = grid.size();
  const std::size_t second = grid.count(grid.m);
  std::vector<std::vector<double>> psi1, psi2;
  for (int i = 0; i < jr.count(); ++i) psi1.push_back(take(full));
  for (int i = 0; i < kr.count(); ++i) psi2.push_back(take(second));
  auto r1 = take(full);
  auto r2 = take(second);
  auto r = take(full);
  if (off != buf.size()) throw IoError("windows.bin: trailing bytes");
  return FilterBank::from_windows(grid, jr, kr, profile, order, std::move(psi1),
                                  std::move(psi2), std::move(r1), std::move(r2), std::move(r));
}

}  // namespace flaghp
