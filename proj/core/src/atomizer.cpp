#include "flaghp/atomizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "flaghp/error.hpp"
#include "flaghp/fft.hpp"
#include "flaghp/ops.hpp"
#include "json.hpp"

namespace flaghp {

double LevelFamily::enlargement_constant() const {
  double c = 0.0;
  for (std::size_t n = 0; n < omega.size(); ++n) {
    if (omega[n].count() == 0) continue;
    c = std::max(c, omega_tilde[n].measure() / omega[n].measure());
  }
  return c;
}

LevelFamily build_level_family(const SampledFunction& gsup, const AtomizerConfig& cfg) {
  LevelFamily fam;
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gsup.size(); ++i) {
    const double v = gsup[i].real();
    if (v < 0.0) throw Error("maximal square function must be nonnegative");
    if (v > 0.0) {
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
  }
  if (hi <= 0.0) return fam;

  fam.i_max = static_cast<int>(std::ceil(std::log2(hi))) - 1;
  fam.i_min = std::max(static_cast<int>(std::floor(std::log2(lo))), fam.i_max - cfg.level_span);
  fam.i_min = std::min(fam.i_min, fam.i_max);

  for (int i = fam.i_min; i <= fam.i_max; ++i) {
    SampledSet om = superlevel(gsup, i == fam.i_min ? 0.0 : std::ldexp(1.0, i));
    if (!fam.omega.empty() && om == fam.omega.back()) {
      fam.omega_tilde.push_back(fam.omega_tilde.back());
    } else {
      fam.omega_tilde.push_back(enlarge(om, cfg.maximal, cfg.enlargement_threshold));
    }
    fam.omega.push_back(std::move(om));
  }
  return fam;
}

std::vector<int> level_map(const LevelFamily& levels) {
  if (levels.empty()) return {};
  const std::size_t size = levels.omega.front().grid().size();
  std::vector<int> lev(size, levels.i_min - 1);
  for (int i = levels.i_min; i <= levels.i_max; ++i) {
    const SampledSet& s = levels.at(i);
    for (std::size_t x = 0; x < size; ++x) {
      if (s.contains(x)) lev[x] = i;
    }
  }
  return lev;
}

int rectangle_level(const Grid& grid, const FlagRectangle& r, const std::vector<int>& lev,
                    int i_min, double majority) {
  const std::vector<std::size_t> cells = rectangle_cells(grid, r);
  std::vector<int> vals;
  vals.reserve(cells.size());
  for (std::size_t c : cells) vals.push_back(lev[c]);
  // The k-th largest level is the top i whose set covers at least k cells.
  const std::size_t k =
      static_cast<std::size_t>(std::floor(majority * static_cast<double>(cells.size()))) + 1;
  if (k > vals.size()) return i_min - 1;
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k - 1), vals.end(),
                   std::greater<int>());
  return std::max(vals[k - 1], i_min - 1);
}

RectangleAssignment assign_rectangles(const LevelFamily& levels, const FilterBank& bank,
                                      double majority) {
  RectangleAssignment out;
  if (levels.empty()) return out;
  out.i_min = levels.i_min;
  out.by_level.resize(static_cast<std::size_t>(levels.i_max - levels.i_min + 1));
  const std::vector<int> lev = level_map(levels);
  for (const ScalePair sp : bank.scale_pairs()) {
    for (FlagRectangle& r : tiling(bank.grid(), sp)) {
      const int i = rectangle_level(bank.grid(), r, lev, levels.i_min, majority);
      if (i < levels.i_min) {
        ++out.unassigned;
      } else {
        out.by_level[static_cast<std::size_t>(i - levels.i_min)].push_back(std::move(r));
      }
    }
  }
  return out;
}

namespace {

SampledFunction masked(const SampledFunction& coef, std::span<const std::size_t> cells) {
  SampledFunction out(coef.grid(), coef.domain());
  for (std::size_t c : cells) out[c] = coef[c];
  return out;
}

}  // namespace

SampledFunction build_particle(const FlagCoefficients& c, const FlagRectangle& r) {
  const Grid& g = c.bank->grid();
  return synthesize_pair(*c.bank, r.sp, masked(c.at(r.sp), rectangle_cells(g, r)));
}

double rectangle_energy(const FlagCoefficients& c, const FlagRectangle& r) {
  const SampledFunction& coef = c.at(r.sp);
  double e = 0.0;
  for (std::size_t cell : rectangle_cells(c.bank->grid(), r)) e += std::norm(coef[cell]);
  return e * coef.cell_volume();
}

double rect_incomparability(double i_r, double j_r, double i_s, double j_s) {
  return (std::min(i_r, i_s) * std::min(j_r, j_s)) / (std::max(i_r, i_s) * std::max(j_r, j_s));
}

double rect_incomparability(const Grid& grid, const FlagRectangle& r, const FlagRectangle& s) {
  const TileShape a = tile_shape(grid, r.sp);
  const TileShape b = tile_shape(grid, s.sp);
  return rect_incomparability(std::pow(a.side_i, grid.n), std::pow(a.side_j, grid.m),
                              std::pow(b.side_i, grid.n), std::pow(b.side_j, grid.m));
}

double particle_leak(const SampledFunction& f, const FlagRectangle& r, double dilation) {
  const Grid& g = f.grid();
  const TileLayout t = tile_layout(g, r.sp);
  const int N = g.samples_per_axis();
  const int D = g.dims();
  double total = 0.0;
  double outside = 0.0;
  std::vector<int> coord(D, 0);
  for (std::size_t x = 0; x < f.size(); ++x) {
    bool inside = true;
    for (int a = 0; a < D && inside; ++a) {
      const double half = 0.5 * dilation * t.cells[a];
      if (2.0 * half >= N) continue;
      const double center = (r.index[a] + 0.5) * t.cells[a];
      double d = std::fmod(std::abs(coord[a] + 0.5 - center), static_cast<double>(N));
      d = std::min(d, N - d);
      if (d > half) inside = false;
    }
    const double w = std::norm(f[x]);
    total += w;
    if (!inside) outside += w;
    for (int a = D - 1; a >= 0; --a) {
      if (++coord[a] < N) break;
      coord[a] = 0;
    }
  }
  return total > 0.0 ? std::sqrt(outside / total) : 0.0;
}

DecompositionPlan plan_decomposition(const SampledFunction& f,
                                     std::shared_ptr<const FilterBank> bank,
                                     const AtomizerConfig& cfg) {
  if (!(cfg.enlargement_threshold > 0.0 && cfg.enlargement_threshold <= 1.0)) {
    throw ConfigError("enlargement threshold must lie in (0, 1]");
  }
  if (!(cfg.majority > 0.0 && cfg.majority <= 1.0)) {
    throw ConfigError("majority fraction must lie in (0, 1]");
  }
  if (!(cfg.dilation > 0.0)) throw ConfigError("dilation must be positive");
  if (cfg.level_span < 0) throw ConfigError("level span must be nonnegative");

  DecompositionPlan plan;
  plan.bank = bank;
  plan.config = cfg;
  plan.f = f;
  plan.coefficients = analyze(f, bank);
  plan.gsup = maximal_square_function(plan.coefficients);
  plan.levels = build_level_family(plan.gsup, cfg);
  plan.assignment = assign_rectangles(plan.levels, *bank, cfg.majority);
  plan.coarse = coarse_remainder(plan.coefficients);

  const Grid& g = bank->grid();
  if (plan.levels.empty()) return plan;
  for (int i = plan.levels.i_min; i <= plan.levels.i_max; ++i) {
    const auto& rects = plan.assignment.at(i);
    if (rects.empty()) continue;
    LevelPlan lp;
    lp.i = i;
    lp.rectangles = rects;
    lp.omega_measure = plan.levels.at(i).measure();
    lp.omega_tilde_measure = plan.levels.tilde_at(i).measure();

    // Mask per scale pair, then one synthesis per pair.
    std::map<ScalePair, std::vector<std::size_t>> cells_by_pair;
    for (const FlagRectangle& r : rects) {
      auto cells = rectangle_cells(g, r);
      auto& dst = cells_by_pair[r.sp];
      dst.insert(dst.end(), cells.begin(), cells.end());
    }
    std::vector<cplx> spec_total(g.size(), cplx(0.0, 0.0));
    for (const auto& [sp, cells] : cells_by_pair) {
      const SampledFunction& coef = plan.coefficients.at(sp);
      const SampledFunction part = masked(coef, cells);
      for (std::size_t c : cells) lp.energy += std::norm(coef[c]);
      const std::vector<cplx> spec = fft::spectrum(part);
      const std::vector<double> m = flag_kernel_spectrum(*bank, sp);
      for (std::size_t x = 0; x < spec_total.size(); ++x) spec_total[x] += spec[x] * m[x];
    }
    lp.energy *= g.cell_volume();
    lp.sum = fft::from_spectrum(g, Domain::base, std::move(spec_total));
    lp.sum_l2 = lp_norm(lp.sum, 2.0);
    if (lp.sum_l2 == 0.0 && lp.energy == 0.0) continue;
    plan.used.push_back(std::move(lp));
  }
  return plan;
}

namespace {

double support_leak(const SampledFunction& a, const LevelPlan& lp, const SampledSet& tilde,
                    double dilation) {
  const Grid& g = a.grid();
  int cells_i = 1;
  int cells_j = 1;
  for (const FlagRectangle& r : lp.rectangles) {
    const TileShape s = tile_shape(g, r.sp);
    cells_i = std::max(cells_i, s.cells_i);
    cells_j = std::max(cells_j, s.cells_j);
  }
  std::vector<int> radius;
  for (int ax = 0; ax < g.dims(); ++ax) {
    const int c = ax < g.n ? cells_i : cells_j;
    radius.push_back(static_cast<int>(std::ceil(0.5 * dilation * c)));
  }
  const SampledSet band = dilate(tilde, radius);
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) {
    const double w = std::norm(a[x]);
    total += w;
    if (!band.contains(x)) outside += w;
  }
  return total > 0.0 ? std::sqrt(outside / total) : 0.0;
}

}  // namespace

AtomicDecomposition calibrate(std::shared_ptr<const DecompositionPlan> plan, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ConfigError("decomposition exponent p must lie in (0, 1], got " + std::to_string(p));
  }
  AtomicDecomposition d;
  d.plan = plan;
  d.p = p;
  d.kernel_constant = plan->bank->kernel_constant();
  d.enlargement_constant = plan->levels.enlargement_constant();
  d.coarse_remainder = plan->coarse;
  d.hp_norm_p = lp_norm_pow(square_function(plan->coefficients), p);

  const double A = d.kernel_constant;
  std::vector<double> h;
  for (const LevelPlan& lp : plan->used) {
    const double hi = std::ldexp(1.0, lp.i) * std::pow(lp.omega_measure, 1.0 / p);
    h.push_back(hi);
    const double t = lp.omega_tilde_measure;
    d.C_l2 = std::max(d.C_l2, lp.sum_l2 * std::pow(t, 0.5 - 1.0 / p) / hi);
    d.C_12 = std::max(d.C_12, std::sqrt(A * lp.energy / (hi * hi * std::pow(t, 1.0 - 2.0 / p))));
  }
  d.C = std::max(d.C_l2, d.C_12);

  for (std::size_t n = 0; n < plan->used.size(); ++n) {
    const LevelPlan& lp = plan->used[n];
    Atom a;
    a.i = lp.i;
    a.lambda = d.C * h[n];
    a.normalization = 1.0 / a.lambda;
    a.values = cplx(a.normalization, 0.0) * lp.sum;
    a.level = &lp;
    a.support_leak = support_leak(a.values, lp, plan->levels.tilde_at(lp.i), plan->config.dilation);
    d.sum_lambda_p += std::pow(a.lambda, p);
    d.atoms.push_back(std::move(a));
  }

  const double fn = lp_norm(plan->f, 2.0);
  if (fn > 0.0) {
    SampledFunction rec = atomic_sum(d);
    rec += d.coarse_remainder;
    rec -= plan->f;
    d.reassembly_residual = lp_norm(rec, 2.0) / fn;
  }
  return d;
}

AtomicDecomposition decompose(const SampledFunction& f, std::shared_ptr<const FilterBank> bank,
                              double p, const AtomizerConfig& cfg) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ConfigError("decomposition exponent p must lie in (0, 1], got " + std::to_string(p));
  }
  auto plan = std::make_shared<const DecompositionPlan>(plan_decomposition(f, std::move(bank), cfg));
  return calibrate(std::move(plan), p);
}

SampledFunction atomic_sum(const AtomicDecomposition& d) {
  SampledFunction out(d.plan->bank->grid(), Domain::base);
  for (const Atom& a : d.atoms) out += cplx(a.lambda, 0.0) * a.values;
  return out;
}

std::string decomposition_manifest(const AtomicDecomposition& d) {
  nlohmann::ordered_json j;
  const DecompositionPlan& plan = *d.plan;
  j["format"] = "flaghp-decomposition";
  j["version"] = 1;
  j["p"] = d.p;
  j["C"] = d.C;
  j["C_l2"] = d.C_l2;
  j["C_12"] = d.C_12;
  j["kernel_constant"] = d.kernel_constant;
  j["sum_lambda_p"] = d.sum_lambda_p;
  j["hp_norm_p"] = d.hp_norm_p;
  j["norm_ratio"] = d.hp_norm_p > 0.0 ? d.sum_lambda_p / d.hp_norm_p : 0.0;
  j["reassembly_residual"] = d.reassembly_residual;
  j["enlargement_constant"] = d.enlargement_constant;
  j["coarse_l2"] = lp_norm(d.coarse_remainder, 2.0);
  j["f_l2"] = lp_norm(plan.f, 2.0);
  j["level_range"] = {plan.levels.i_min, plan.levels.i_max};
  j["unassigned_rectangles"] = plan.assignment.unassigned;
  j["atoms"] = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < d.atoms.size(); ++n) {
    const Atom& a = d.atoms[n];
    j["atoms"].push_back({{"index", n},
                          {"i", a.i},
                          {"lambda", a.lambda},
                          {"omega_measure", a.level->omega_measure},
                          {"omega_tilde_measure", a.level->omega_tilde_measure},
                          {"rectangle_count", a.level->rectangles.size()},
                          {"l2_norm", lp_norm(a.values, 2.0)},
                          {"support_leak", a.support_leak}});
  }
  return j.dump(2) + "\n";
}

}  // namespace flaghp
