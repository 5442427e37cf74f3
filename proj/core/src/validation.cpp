#include "flaghp/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

#include "flaghp/error.hpp"
#include "flaghp/fft.hpp"
#include "flaghp/ops.hpp"
#include "json.hpp"

namespace flaghp {
namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Flat index of (a - b) mod N in an m-dimensional cube.
std::size_t sub_index(std::size_t a, std::size_t b, int m, std::size_t N) {
  std::size_t out = 0;
  std::size_t mult = 1;
  for (int ax = 0; ax < m; ++ax) {
    const std::size_t ca = a % N;
    const std::size_t cb = b % N;
    a /= N;
    b /= N;
    out += mult * ((ca + N - cb) % N);
    mult *= N;
  }
  return out;
}

// Pseudo-product box of a lift, per lifted axis: centre (physical) and
// width in cells.
struct Box {
  std::vector<double> center;
  std::vector<int> cells;
};

Box lift_box(const Grid& g, const LiftedParticle& lp) {
  const TileLayout t = tile_layout(g, lp.rect.sp);
  const double h = g.spacing();
  Box b;
  auto centre_of = [&](int base_axis) {
    return (lp.rect.index[base_axis] + 0.5) * t.cells[base_axis] * h;
  };
  for (int a = 0; a < g.n; ++a) {
    b.center.push_back(centre_of(a));
    b.cells.push_back(t.shape.cells_i);
  }
  // Middle group: I^ at the origin (sharp) or J (tilde).
  for (int a = 0; a < g.m; ++a) {
    if (lp.branch == Branch::sharp) {
      b.center.push_back(0.0);
      b.cells.push_back(t.shape.cells_i);
    } else {
      b.center.push_back(centre_of(g.n + a));
      b.cells.push_back(t.shape.cells_j);
    }
  }
  // Last group: J (sharp) or J^ at the origin (tilde).
  for (int a = 0; a < g.m; ++a) {
    if (lp.branch == Branch::sharp) {
      b.center.push_back(centre_of(g.n + a));
    } else {
      b.center.push_back(0.0);
    }
    b.cells.push_back(t.shape.cells_j);
  }
  return b;
}

// Signed periodic displacement of sample `idx` from `center`, in [-side/2, side/2).
double displacement(const Grid& g, int idx, double center) {
  double d = std::fmod(idx * g.spacing() - center, g.side);
  if (d < -0.5 * g.side) d += g.side;
  if (d >= 0.5 * g.side) d -= g.side;
  return d;
}

bool in_dilated(const Grid& g, int idx, double center, int cells, double dilation) {
  const double half = 0.5 * dilation * cells;
  if (2.0 * half >= g.samples_per_axis()) return true;
  return std::abs(displacement(g, idx, center)) <= half * g.spacing();
}

// All exponent vectors of length `dims` with total degree <= max_order.
std::vector<std::vector<int>> exponents(int dims, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(dims, 0);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dims) {
      out.push_back(e);
      return;
    }
    for (int q = 0; q <= left; ++q) {
      e[axis] = q;
      rec(axis + 1, left - q);
    }
    e[axis] = 0;
  };
  rec(0, max_order);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int sa = 0, sb = 0;
    for (int v : a) sa += v;
    for (int v : b) sb += v;
    return sa < sb;
  });
  return out;
}

SampledFunction masked_coefficient(const FlagCoefficients& c, const FlagRectangle& r) {
  const SampledFunction& coef = c.at(r.sp);
  SampledFunction out(coef.grid(), Domain::base);
  for (std::size_t cell : rectangle_cells(c.bank->grid(), r)) out[cell] = coef[cell];
  return out;
}

double sup_abs(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s = std::max(s, std::abs(z));
  return s;
}

}  // namespace

const char* to_string(Branch b) { return b == Branch::sharp ? "sharp" : "tilde"; }

Branch branch_for(ScalePair sp) { return sp.j <= sp.k ? Branch::sharp : Branch::tilde; }

double dR_value(const FlagCoefficients& c, const FlagRectangle& r, double normalization,
                double kernel_constant) {
  const Grid& g = c.bank->grid();
  const TileShape s = tile_shape(g, r.sp);
  const double area = rectangle_measure(g, r);
  const double sharp_volume = std::pow(s.side_i, g.n + g.m) * std::pow(s.side_j, g.m);
  return kernel_constant * std::sqrt(area) * std::sqrt(rectangle_energy(c, r)) *
         std::abs(normalization) / sharp_volume;
}

LiftedParticle lift_particle(const FlagCoefficients& c, const FlagRectangle& r,
                             double normalization, std::size_t budget) {
  const FilterBank& bank = *c.bank;
  const Grid& g = bank.grid();
  const std::size_t N = static_cast<std::size_t>(g.samples_per_axis());
  const std::size_t total = g.count(g.dims() + g.m);
  if (total > budget) {
    throw Error("lifted grid of " + std::to_string(total) + " samples exceeds the budget of " +
                std::to_string(budget));
  }
  LiftedParticle lp;
  lp.rect = r;
  lp.branch = branch_for(r.sp);
  lp.normalization = normalization;
  lp.dR = dR_value(c, r, normalization, bank.kernel_constant());

  const std::vector<cplx> C = fft::spectrum(masked_coefficient(c, r));
  const auto w1 = bank.psi1(r.sp.j);
  const auto w2 = bank.psi2(r.sp.k);
  const std::size_t Nm = ipow(N, g.m);
  const double scale = normalization / g.cell_volume(g.m);

  std::vector<cplx> spec(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const std::size_t last = flat % Nm;
    const std::size_t first = flat / Nm;  // index on the (n+m) grid
    const double w = w1[first] * w2[last];
    if (w == 0.0) continue;
    const std::size_t cidx =
        lp.branch == Branch::sharp ? (first / Nm) * Nm + last : first;
    spec[flat] = C[cidx] * (w * scale);
  }
  lp.values = fft::from_spectrum(g, Domain::lifted, std::move(spec));
  return lp;
}

SampledFunction marginalize(const LiftedParticle& lp) {
  const Grid& g = lp.values.grid();
  const std::size_t N = static_cast<std::size_t>(g.samples_per_axis());
  const std::size_t Nm = ipow(N, g.m);
  const std::size_t Nn = ipow(N, g.n);
  const double dv = g.cell_volume(g.m);
  SampledFunction out(g, Domain::base);
  for (std::size_t x1 = 0; x1 < Nn; ++x1) {
    for (std::size_t x2 = 0; x2 < Nm; ++x2) {
      cplx acc(0.0, 0.0);
      for (std::size_t x3 = 0; x3 < Nm; ++x3) {
        const std::size_t d = sub_index(x2, x3, g.m, N);
        const std::size_t idx = lp.branch == Branch::sharp ? (x1 * Nm + x3) * Nm + d
                                                           : (x1 * Nm + d) * Nm + x3;
        acc += lp.values[idx];
      }
      out[x1 * Nm + x2] = acc * dv;
    }
  }
  return out;
}

std::vector<MomentEntry> check_moments(const LiftedParticle& lp, int max_order, double dilation,
                                       bool raw) {
  if (max_order < 0 || max_order > 4) throw ConfigError("moment order must lie in [0, 4]");
  const Grid& g = lp.values.grid();
  const int N = g.samples_per_axis();
  const int g1 = g.dims();
  const int rank = g1 + g.m;
  const std::size_t Nm = g.count(g.m);
  const std::size_t N1 = g.count(g1);
  const Box box = lift_box(g, lp);
  const double h = g.spacing();
  const double sup = sup_abs(lp.values.values());

  // Per-axis monomial base t_a(x) and the dilated-box indicator.
  std::vector<std::vector<double>> t(rank, std::vector<double>(N));
  std::vector<std::vector<char>> inside(rank, std::vector<char>(N));
  for (int a = 0; a < rank; ++a) {
    for (int x = 0; x < N; ++x) {
      const double d = displacement(g, x, box.center[a]);
      t[a][x] = raw ? d : g.side / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * d / g.side);
      inside[a][x] = in_dilated(g, x, box.center[a], box.cells[a], dilation) ? 1 : 0;
    }
  }

  auto weights = [&](int first_axis, const std::vector<int>& e, double& scale) {
    const int dims = static_cast<int>(e.size());
    const std::size_t count = g.count(dims);
    std::vector<double> w(count);
    std::vector<int> idx(dims, 0);
    for (std::size_t flat = 0; flat < count; ++flat) {
      double v = 1.0;
      for (int a = 0; a < dims; ++a) v *= std::pow(t[first_axis + a][idx[a]], e[a]);
      w[flat] = v * g.cell_volume(dims);
      for (int a = dims - 1; a >= 0; --a) {
        if (++idx[a] < N) break;
        idx[a] = 0;
      }
    }
    scale = 1.0;
    for (int a = 0; a < dims; ++a) {
      double s = 0.0;
      for (int x = 0; x < N; ++x) {
        if (inside[first_axis + a][x]) s += std::pow(std::abs(t[first_axis + a][x]), e[a]) * h;
      }
      scale *= s;
    }
    return w;
  };

  std::vector<MomentEntry> table;
  for (const auto& e : exponents(g1, max_order)) {
    double scale = 0.0;
    const std::vector<double> w = weights(0, e, scale);
    std::vector<cplx> m(Nm, cplx(0.0, 0.0));
    for (std::size_t x = 0; x < N1; ++x) {
      if (w[x] == 0.0) continue;
      for (std::size_t z = 0; z < Nm; ++z) m[z] += lp.values[x * Nm + z] * w[x];
    }
    MomentEntry me;
    me.group = 1;
    me.exponent = e;
    for (int v : e) me.order += v;
    const double denom = sup * scale;
    me.residual = denom > 0.0 ? sup_abs(m) / denom : 0.0;
    table.push_back(std::move(me));
  }
  for (const auto& e : exponents(g.m, max_order)) {
    double scale = 0.0;
    const std::vector<double> w = weights(g1, e, scale);
    double worst = 0.0;
    for (std::size_t x = 0; x < N1; ++x) {
      cplx acc(0.0, 0.0);
      for (std::size_t z = 0; z < Nm; ++z) acc += lp.values[x * Nm + z] * w[z];
      worst = std::max(worst, std::abs(acc));
    }
    MomentEntry me;
    me.group = 2;
    me.exponent = e;
    for (int v : e) me.order += v;
    const double denom = sup * scale;
    me.residual = denom > 0.0 ? worst / denom : 0.0;
    table.push_back(std::move(me));
  }
  return table;
}

double max_residual(const std::vector<MomentEntry>& table, int group, int order) {
  double r = 0.0;
  for (const auto& e : table) {
    if (e.group == group && e.order == order) r = std::max(r, e.residual);
  }
  return r;
}

DRTable measure_dR(const LiftedParticle& lp, const FlagCoefficients& c, double kernel_constant,
                   int k_max) {
  if (k_max < 0 || k_max > 2) throw ConfigError("derivative order cap must lie in [0, 2]");
  const Grid& g = lp.values.grid();
  DRTable t;
  t.dR = dR_value(c, lp.rect, lp.normalization, kernel_constant);
  if (t.dR == 0.0) return t;
  const TileShape s = tile_shape(g, lp.rect.sp);
  const std::vector<int> shape = lp.values.shape();
  t.sup_ratio = sup_abs(lp.values.values()) / t.dR;
  t.max_ratio = t.sup_ratio;
  for (int axis = 0; axis < static_cast<int>(shape.size()); ++axis) {
    const double budget = axis < g.dims() ? s.side_i : s.side_j;
    for (int q = 1; q <= k_max; ++q) {
      const auto d = central_difference(lp.values.values(), shape, axis, q, g.spacing());
      SmoothnessEntry e;
      e.axis = axis;
      e.order = q;
      e.ratio = sup_abs(d) * std::pow(budget, q) / t.dR;
      t.max_ratio = std::max(t.max_ratio, e.ratio);
      t.derivatives.push_back(e);
    }
  }
  return t;
}

double lift_leak(const LiftedParticle& lp, double dilation) {
  const Grid& g = lp.values.grid();
  const int N = g.samples_per_axis();
  const int rank = lp.values.rank();
  const Box box = lift_box(g, lp);
  std::vector<std::vector<char>> inside(rank, std::vector<char>(N));
  for (int a = 0; a < rank; ++a) {
    for (int x = 0; x < N; ++x) inside[a][x] = in_dilated(g, x, box.center[a], box.cells[a], dilation);
  }
  double total = 0.0, outside = 0.0;
  std::vector<int> idx(rank, 0);
  for (std::size_t flat = 0; flat < lp.values.size(); ++flat) {
    bool in = true;
    for (int a = 0; a < rank && in; ++a) in = inside[a][idx[a]] != 0;
    const double w = std::norm(lp.values[flat]);
    total += w;
    if (!in) outside += w;
    for (int a = rank - 1; a >= 0; --a) {
      if (++idx[a] < N) break;
      idx[a] = 0;
    }
  }
  return total > 0.0 ? std::sqrt(outside / total) : 0.0;
}

namespace {

double dR_sum(const AtomicDecomposition& d, std::size_t atom, double measure) {
  const Atom& a = d.atoms.at(atom);
  const FlagCoefficients& c = d.plan->coefficients;
  const Grid& g = c.bank->grid();
  const double A = d.kernel_constant;
  if (A == 0.0) return 0.0;
  double s = 0.0;
  for (const FlagRectangle& r : a.level->rectangles) {
    const double dr = dR_value(c, r, a.normalization, A);
    const double hat = std::pow(tile_shape(g, r.sp).side_i, g.m);
    s += dr * dr * rectangle_measure(g, r) * hat * hat;
  }
  return s / (A * std::pow(measure, 1.0 - 2.0 / d.p));
}

}  // namespace

double check_dR_sum(const AtomicDecomposition& d, std::size_t atom) {
  return dR_sum(d, atom, d.atoms.at(atom).level->omega_tilde_measure);
}

double check_dR_sum_omega(const AtomicDecomposition& d, std::size_t atom) {
  return dR_sum(d, atom, d.atoms.at(atom).level->omega_measure);
}

double check_atom_gf_bound(const SampledFunction& atom, std::shared_ptr<const FilterBank> bank,
                           double p) {
  return hp_norm(atom, std::move(bank), p);
}

std::vector<std::pair<std::size_t, FlagRectangle>> sample_rectangles(const AtomicDecomposition& d,
                                                                     std::size_t count) {
  std::vector<std::pair<std::size_t, FlagRectangle>> by_branch[2];
  for (std::size_t n = 0; n < d.atoms.size(); ++n) {
    for (const FlagRectangle& r : d.atoms[n].level->rectangles) {
      by_branch[branch_for(r.sp) == Branch::sharp ? 0 : 1].emplace_back(n, r);
    }
  }
  std::size_t want[2] = {count / 2 + count % 2, count / 2};
  for (int b = 0; b < 2; ++b) {
    const std::size_t other = 1 - b;
    if (by_branch[b].size() < want[b]) {
      want[other] += want[b] - by_branch[b].size();
      want[b] = by_branch[b].size();
    }
  }
  std::vector<std::pair<std::size_t, FlagRectangle>> out;
  for (int b = 0; b < 2; ++b) {
    const auto& src = by_branch[b];
    const std::size_t k = std::min(want[b], src.size());
    for (std::size_t t = 0; t < k; ++t) {
      out.push_back(src[(2 * t + 1) * src.size() / (2 * k)]);
    }
  }
  return out;
}

ValidationResult validate_decomposition(const AtomicDecomposition& d, const ValidationConfig& cfg) {
  ValidationResult res;
  const FlagCoefficients& c = d.plan->coefficients;
  const double p = d.p;
  auto fail = [&](const std::string& msg) {
    res.pass = false;
    res.failures.push_back(msg);
  };

  for (std::size_t n = 0; n < d.atoms.size(); ++n) {
    const Atom& a = d.atoms[n];
    AtomReport r;
    r.atom_index = n;
    r.i = a.i;
    r.lambda = a.lambda;
    const double l2 = lp_norm(a.values, 2.0);
    r.l2_ratio = l2 * std::pow(a.level->omega_tilde_measure, 0.5 - 1.0 / p);
    r.l2_ratio_omega = l2 * std::pow(a.level->omega_measure, 0.5 - 1.0 / p);
    r.support_leak = a.support_leak;
    r.dR_sum_ratio = check_dR_sum(d, n);
    r.dR_sum_ratio_omega = check_dR_sum_omega(d, n);
    r.gf_bound = check_atom_gf_bound(a.values, d.plan->bank, p);
    r.rectangles = a.level->rectangles.size();
    res.sup_gf_bound = std::max(res.sup_gf_bound, r.gf_bound);
    if (!(r.l2_ratio <= 1.0 + cfg.tol_l2)) {
      r.pass = false;
      fail("atom " + std::to_string(n) + ": L2 size ratio " + std::to_string(r.l2_ratio));
    }
    if (!(r.dR_sum_ratio <= 1.0 + cfg.tol_dr_sum)) {
      r.pass = false;
      fail("atom " + std::to_string(n) + ": d_R sum ratio " + std::to_string(r.dR_sum_ratio));
    }
    res.atoms.push_back(r);
  }

  for (const auto& [n, rect] : sample_rectangles(d, cfg.sample_rectangles)) {
    const Atom& a = d.atoms[n];
    LiftReport lr;
    lr.atom = n;
    lr.rect = rect;
    const LiftedParticle lp = lift_particle(c, rect, a.normalization, cfg.lift_budget);
    lr.branch = lp.branch;
    (lp.branch == Branch::sharp ? res.sharp_lifts : res.tilde_lifts) += 1;

    SampledFunction fr = build_particle(c, rect);
    lr.particle_leak = particle_leak(fr, rect, cfg.dilation);
    fr *= cplx(a.normalization, 0.0);
    SampledFunction diff = marginalize(lp);
    diff -= fr;
    const double fn = lp_norm(fr, 2.0);
    lr.marginal_residual = fn > 0.0 ? lp_norm(diff, 2.0) / fn : lp_norm(diff, 2.0);

    for (const auto& e : check_moments(lp, cfg.moment_order, cfg.dilation, false)) {
      (e.group == 1 ? lr.moment_group1 : lr.moment_group2) =
          std::max(e.group == 1 ? lr.moment_group1 : lr.moment_group2, e.residual);
    }
    for (const auto& e : check_moments(lp, cfg.moment_order, cfg.dilation, true)) {
      (e.group == 1 ? lr.raw_moment_group1 : lr.raw_moment_group2) =
          std::max(e.group == 1 ? lr.raw_moment_group1 : lr.raw_moment_group2, e.residual);
    }
    const DRTable t = measure_dR(lp, c, d.kernel_constant, cfg.k_max);
    lr.dR = t.dR;
    lr.smooth_max = t.max_ratio;
    lr.lift_leak = lift_leak(lp, cfg.dilation);

    const std::string tag = "lift (atom " + std::to_string(n) + ", j=" + std::to_string(rect.sp.j) +
                            ", k=" + std::to_string(rect.sp.k) + ")";
    if (!(lr.marginal_residual <= cfg.tol_marginal)) {
      lr.pass = false;
      fail(tag + ": marginalization residual " + std::to_string(lr.marginal_residual));
    }
    if (!(lr.moment_group1 <= cfg.tol_moment && lr.moment_group2 <= cfg.tol_moment)) {
      lr.pass = false;
      char buf[160];
      std::snprintf(buf, sizeof buf, ": moment residuals %.3e / %.3e", lr.moment_group1,
                    lr.moment_group2);
      fail(tag + buf);
    }
    if (!(lr.smooth_max <= 1.0 + cfg.tol_smooth)) {
      lr.pass = false;
      fail(tag + ": size/smoothness ratio " + std::to_string(lr.smooth_max));
    }
    AtomReport& ar = res.atoms[n];
    ar.lifts += 1;
    ar.moment_residual = std::max({ar.moment_residual, lr.moment_group1, lr.moment_group2});
    ar.smooth_max = std::max(ar.smooth_max, lr.smooth_max);
    if (!lr.pass) ar.pass = false;
    res.lifts.push_back(std::move(lr));
  }
  return res;
}

std::string validation_json(const ValidationResult& r, const ValidationConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = "flaghp-validation";
  j["version"] = 1;
  j["pass"] = r.pass;
  j["tolerances"] = {{"moment", cfg.tol_moment},     {"marginal", cfg.tol_marginal},
                     {"dR_sum", cfg.tol_dr_sum},     {"smooth", cfg.tol_smooth},
                     {"l2", cfg.tol_l2},             {"moment_order", cfg.moment_order},
                     {"k_max", cfg.k_max},           {"dilation", cfg.dilation}};
  j["sharp_lifts"] = r.sharp_lifts;
  j["tilde_lifts"] = r.tilde_lifts;
  j["sup_gf_bound"] = r.sup_gf_bound;
  j["atoms"] = nlohmann::ordered_json::array();
  for (const auto& a : r.atoms) {
    j["atoms"].push_back({{"atom", a.atom_index},
                          {"i", a.i},
                          {"lambda", a.lambda},
                          {"l2_ratio", a.l2_ratio},
                          {"l2_ratio_omega", a.l2_ratio_omega},
                          {"support_leak", a.support_leak},
                          {"moment_residual", a.moment_residual},
                          {"dR_sum_ratio", a.dR_sum_ratio},
                          {"dR_sum_ratio_omega", a.dR_sum_ratio_omega},
                          {"gf_bound", a.gf_bound},
                          {"smooth_max", a.smooth_max},
                          {"rectangles", a.rectangles},
                          {"lifts", a.lifts},
                          {"pass", a.pass}});
  }
  j["lifts"] = nlohmann::ordered_json::array();
  for (const auto& l : r.lifts) {
    j["lifts"].push_back({{"atom", l.atom},
                          {"j", l.rect.sp.j},
                          {"k", l.rect.sp.k},
                          {"index", l.rect.index},
                          {"branch", to_string(l.branch)},
                          {"marginal_residual", l.marginal_residual},
                          {"moment_group1", l.moment_group1},
                          {"moment_group2", l.moment_group2},
                          {"raw_moment_group1", l.raw_moment_group1},
                          {"raw_moment_group2", l.raw_moment_group2},
                          {"smooth_max", l.smooth_max},
                          {"dR", l.dR},
                          {"lift_leak", l.lift_leak},
                          {"particle_leak", l.particle_leak},
                          {"pass", l.pass}});
  }
  j["failures"] = r.failures;
  return j.dump(2) + "\n";
}

std::string atom_reports_csv(const ValidationResult& r) {
  std::ostringstream os;
  os << "atom,i,lambda,l2_ratio,l2_ratio_omega,support_leak,moment_residual,dR_sum_ratio,"
        "dR_sum_ratio_omega,gf_bound,smooth_max,rectangles,lifts,pass\n";
  char buf[512];
  for (const auto& a : r.atoms) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%d\n",
                  a.atom_index, a.i, a.lambda, a.l2_ratio, a.l2_ratio_omega, a.support_leak,
                  a.moment_residual, a.dR_sum_ratio, a.dR_sum_ratio_omega, a.gf_bound, a.smooth_max,
                  a.rectangles, a.lifts, a.pass ? 1 : 0);
    os << buf;
  }
  return os.str();
}

}  // namespace flaghp
