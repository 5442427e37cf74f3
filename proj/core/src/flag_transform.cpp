#include "flaghp/flag_transform.hpp"

#include <algorithm>
#include <cmath>

#include "flaghp/error.hpp"
#include "flaghp/fft.hpp"
#include "flaghp/io.hpp"
#include "flaghp/ops.hpp"
#include "json.hpp"

namespace flaghp {

std::size_t TileLayout::tile_of(std::size_t flat, int N) const {
  std::size_t id = 0;
  std::size_t mult = 1;
  for (int a = static_cast<int>(cells.size()) - 1; a >= 0; --a) {
    const int coord = static_cast<int>(flat % static_cast<std::size_t>(N));
    flat /= static_cast<std::size_t>(N);
    id += mult * static_cast<std::size_t>(coord / cells[a]);
    mult *= static_cast<std::size_t>(counts[a]);
  }
  return id;
}

std::vector<int> TileLayout::position(std::size_t id) const {
  std::vector<int> pos(cells.size());
  for (int a = static_cast<int>(cells.size()) - 1; a >= 0; --a) {
    pos[a] = static_cast<int>(id % static_cast<std::size_t>(counts[a]));
    id /= static_cast<std::size_t>(counts[a]);
  }
  return pos;
}

std::size_t TileLayout::id(std::span<const int> pos) const {
  std::size_t out = 0;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    const int c = ((pos[a] % counts[a]) + counts[a]) % counts[a];
    out = out * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(c);
  }
  return out;
}

TileLayout tile_layout(const Grid& grid, ScalePair sp) {
  TileLayout t;
  t.sp = sp;
  t.shape = tile_shape(grid, sp);
  const int N = grid.samples_per_axis();
  for (int a = 0; a < grid.dims(); ++a) {
    const int c = a < grid.n ? t.shape.cells_i : t.shape.cells_j;
    t.cells.push_back(c);
    t.counts.push_back(N / c);
  }
  t.tiles = 1;
  for (int c : t.counts) t.tiles *= static_cast<std::size_t>(c);
  return t;
}

FlagRectangle rectangle_of_tile(const TileLayout& layout, std::size_t id) {
  return FlagRectangle{layout.sp, layout.position(id)};
}

std::vector<FlagRectangle> tiling(const Grid& grid, ScalePair sp) {
  const TileLayout t = tile_layout(grid, sp);
  std::vector<FlagRectangle> out;
  out.reserve(t.tiles);
  for (std::size_t id = 0; id < t.tiles; ++id) out.push_back(rectangle_of_tile(t, id));
  return out;
}

std::vector<std::size_t> rectangle_cells(const Grid& grid, const FlagRectangle& r) {
  const TileLayout t = tile_layout(grid, r.sp);
  if (r.index.size() != t.cells.size()) throw Error("rectangle rank does not match grid");
  const int D = grid.dims();
  const int N = grid.samples_per_axis();
  std::size_t count = 1;
  for (int c : t.cells) count *= static_cast<std::size_t>(c);
  std::vector<std::size_t> out;
  out.reserve(count);
  std::vector<int> local(D, 0);
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t flat = 0;
    for (int a = 0; a < D; ++a) {
      const int pos = ((r.index[a] % t.counts[a]) + t.counts[a]) % t.counts[a];
      flat = flat * static_cast<std::size_t>(N) +
             static_cast<std::size_t>(pos * t.cells[a] + local[a]);
    }
    out.push_back(flat);
    for (int a = D - 1; a >= 0; --a) {
      if (++local[a] < t.cells[a]) break;
      local[a] = 0;
    }
  }
  return out;
}

double rectangle_measure(const Grid& grid, const FlagRectangle& r) {
  const TileShape s = tile_shape(grid, r.sp);
  return std::pow(s.side_i, grid.n) * std::pow(s.side_j, grid.m);
}

const SampledFunction& FlagCoefficients::at(ScalePair sp) const {
  auto it = coeffs.find(sp);
  if (it == coeffs.end()) {
    throw ConfigError("scale pair (" + std::to_string(sp.j) + "," + std::to_string(sp.k) +
                      ") not in coefficient family");
  }
  return it->second;
}

namespace {

SampledFunction filtered(const Grid& g, std::span<const cplx> spec, std::span<const double> m) {
  std::vector<cplx> out(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i] * m[i];
  return fft::from_spectrum(g, Domain::base, std::move(out));
}

std::vector<double> sqrt_residual(const FilterBank& bank) {
  std::vector<double> r(bank.residual().begin(), bank.residual().end());
  for (double& v : r) v = std::sqrt(v);
  return r;
}

void require_base_on(const SampledFunction& f, const FilterBank& bank) {
  if (f.domain() != Domain::base) throw Error("flag analysis needs a base-domain function");
  if (!(f.grid() == bank.grid())) throw Error("function grid does not match the filter bank grid");
}

}  // namespace

FlagCoefficients analyze(const SampledFunction& f, std::shared_ptr<const FilterBank> bank) {
  if (!bank) throw Error("analyze: null filter bank");
  require_base_on(f, *bank);
  const std::vector<cplx> spec = fft::spectrum(f);
  FlagCoefficients c;
  c.bank = bank;
  for (const ScalePair sp : bank->scale_pairs()) {
    c.coeffs.emplace(sp, filtered(f.grid(), spec, flag_kernel_spectrum(*bank, sp)));
  }
  c.coarse = filtered(f.grid(), spec, sqrt_residual(*bank));
  return c;
}

SampledFunction square_function(const FlagCoefficients& c) {
  const Grid& g = c.bank->grid();
  std::vector<double> acc(g.size(), 0.0);
  for (const auto& [sp, coef] : c.coeffs) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::norm(coef[i]);
  }
  std::vector<cplx> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = std::sqrt(acc[i]);
  return SampledFunction(g, Domain::base, std::move(out));
}

int sup_oversampling(const Grid& g, double top_frequency) {
  const int N = g.samples_per_axis();
  const double needed = 16.0 * top_frequency * g.side;
  int r = 1;
  while (N * r < needed && std::pow(2.0 * N * r, g.dims()) <= kMaxSupSamples) r *= 2;
  return r;
}

SampledFunction maximal_square_function(const FlagCoefficients& c) {
  const Grid& g = c.bank->grid();
  const int N = g.samples_per_axis();
  const int D = g.dims();
  std::vector<double> acc(g.size(), 0.0);
  for (const auto& [sp, coef] : c.coeffs) {
    const TileLayout t = tile_layout(g, sp);
    std::vector<std::size_t> tile_of(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) tile_of[i] = t.tile_of(i, N);
    // The sup over a tile is a sup over a continuum. Near the Nyquist rate
    // the samples can miss a peak by 1 - cos(pi f / N), so the coefficient
    // is interpolated until its top frequency gets >= 16 samples per period.
    const int r = sup_oversampling(g, c.bank->c2() * std::ldexp(1.0, sp.j));
    const std::vector<cplx> fine = trig_upsample(coef.values(), D, N, r);
    const int M = N * r;
    std::vector<double> tile_max(t.tiles, 0.0);
    std::vector<int> pos(D);
    for (std::size_t i = 0; i < fine.size(); ++i) {
      std::size_t rem = i;
      for (int a = D - 1; a >= 0; --a) {
        pos[a] = static_cast<int>(rem % static_cast<std::size_t>(M)) / (r * t.cells[a]);
        rem /= static_cast<std::size_t>(M);
      }
      const std::size_t id = t.id(pos);
      tile_max[id] = std::max(tile_max[id], std::abs(fine[i]));
    }
    // Max over the 3^D block of neighbouring tiles.
    std::vector<double> dilated(t.tiles, 0.0);
    std::size_t neighbours = 1;
    for (int a = 0; a < D; ++a) neighbours *= 3;
    for (std::size_t id = 0; id < t.tiles; ++id) {
      const std::vector<int> pos = t.position(id);
      std::vector<int> q(D);
      double best = 0.0;
      for (std::size_t nb = 0; nb < neighbours; ++nb) {
        std::size_t rem = nb;
        for (int a = 0; a < D; ++a) {
          q[a] = pos[a] + static_cast<int>(rem % 3) - 1;
          rem /= 3;
        }
        best = std::max(best, tile_max[t.id(q)]);
      }
      dilated[id] = best;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = dilated[tile_of[i]];
      acc[i] += v * v;
    }
  }
  std::vector<cplx> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = std::sqrt(acc[i]);
  return SampledFunction(g, Domain::base, std::move(out));
}

SampledFunction synthesize_pair(const FilterBank& bank, ScalePair sp, const SampledFunction& g) {
  require_base_on(g, bank);
  return apply_multiplier(g, flag_kernel_spectrum(bank, sp));
}

SampledFunction coarse_remainder(const FlagCoefficients& c) {
  return apply_multiplier(c.coarse, sqrt_residual(*c.bank));
}

SampledFunction reconstruct(const FlagCoefficients& c, bool include_coarse) {
  const Grid& g = c.bank->grid();
  // Accumulate in frequency so the synthesis costs one inverse transform.
  std::vector<cplx> total(g.size(), cplx(0.0, 0.0));
  for (const auto& [sp, coef] : c.coeffs) {
    const std::vector<cplx> spec = fft::spectrum(coef);
    const std::vector<double> m = flag_kernel_spectrum(*c.bank, sp);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += spec[i] * m[i];
  }
  if (include_coarse) {
    const std::vector<cplx> spec = fft::spectrum(c.coarse);
    const std::vector<double> m = sqrt_residual(*c.bank);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += spec[i] * m[i];
  }
  return fft::from_spectrum(g, Domain::base, std::move(total));
}

double hp_norm(const SampledFunction& f, std::shared_ptr<const FilterBank> bank, double p) {
  return lp_norm(square_function(analyze(f, std::move(bank))), p);
}

void write_coefficients(const std::filesystem::path& dir, const FlagCoefficients& c) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "flaghp-coefficients";
  manifest["version"] = 1;
  manifest["bank"] = nlohmann::ordered_json::parse(bank_descriptor_json(*c.bank));
  manifest["pairs"] = nlohmann::ordered_json::array();
  for (const auto& [sp, coef] : c.coeffs) {
    const std::string rel =
        "j_" + std::to_string(sp.j) + "/k_" + std::to_string(sp.k) + ".bin";
    io::write_function(dir / rel, coef);
    manifest["pairs"].push_back({{"j", sp.j}, {"k", sp.k}, {"file", rel}});
  }
  io::write_function(dir / "coarse.bin", c.coarse);
  manifest["coarse"] = "coarse.bin";
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

FlagCoefficients read_coefficients(const std::filesystem::path& dir,
                                   std::shared_ptr<const FilterBank> bank) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad coefficient manifest: ") + e.what());
  }
  FlagCoefficients c;
  c.bank = bank;
  try {
    for (const auto& e : manifest.at("pairs")) {
      const ScalePair sp{e.at("j").get<int>(), e.at("k").get<int>()};
      if (!bank->contains(sp)) throw IoError("coefficient manifest lists a pair outside the bank");
      c.coeffs.emplace(sp, io::read_function(dir / e.at("file").get<std::string>()));
    }
    c.coarse = io::read_function(dir / manifest.at("coarse").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad coefficient manifest: ") + e.what());
  }
  if (c.coeffs.size() != bank->scale_pairs().size()) {
    throw IoError("coefficient manifest does not cover the bank lattice");
  }
  return c;
}

}  // namespace flaghp
