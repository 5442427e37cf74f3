#include "flaghp/operators.hpp"

#include <algorithm>
#include <cmath>

#include "flaghp/error.hpp"
#include "flaghp/io.hpp"
#include "flaghp/ops.hpp"
#include "json.hpp"

namespace flaghp {
namespace {

double sup_abs(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& z : v) s = std::max(s, std::abs(z));
  return s;
}

// Signed DFT indices of a flat base-grid index.
std::vector<int> signed_indices(const Grid& g, std::size_t flat) {
  const int N = g.samples_per_axis();
  std::vector<int> k(g.dims());
  for (int a = g.dims() - 1; a >= 0; --a) {
    k[a] = signed_index(static_cast<int>(flat % static_cast<std::size_t>(N)), N);
    flat /= static_cast<std::size_t>(N);
  }
  return k;
}

std::size_t flat_of(const Grid& g, const std::vector<int>& k) {
  const int N = g.samples_per_axis();
  std::size_t flat = 0;
  for (int a = 0; a < g.dims(); ++a) {
    flat = flat * static_cast<std::size_t>(N) + static_cast<std::size_t>(((k[a] % N) + N) % N);
  }
  return flat;
}

}  // namespace

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::identity: return "identity";
    case OperatorKind::zero: return "zero";
    case OperatorKind::marcinkiewicz_flag: return "marcinkiewicz-flag";
    case OperatorKind::riesz_like: return "riesz-like";
    case OperatorKind::custom: return "custom";
  }
  return "?";
}

OperatorKind parse_operator_kind(const std::string& s) {
  for (auto k : {OperatorKind::identity, OperatorKind::zero, OperatorKind::marcinkiewicz_flag,
                 OperatorKind::riesz_like, OperatorKind::custom}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown operator kind: " + s);
}

MultiplierOperator build_multiplier(OperatorKind kind, const Grid& grid) {
  if (kind == OperatorKind::custom) {
    throw ConfigError("custom operators are loaded from a symbol file");
  }
  MultiplierOperator op;
  op.kind = kind;
  op.grid = grid;
  op.symbol.assign(grid.size(), cplx(0.0, 0.0));
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    const std::vector<int> k = signed_indices(grid, flat);
    double r1 = 0.0, r2 = 0.0;
    for (int a = 0; a < grid.n; ++a) r1 += std::pow(k[a] / grid.side, 2);
    for (int a = grid.n; a < grid.dims(); ++a) r2 += std::pow(k[a] / grid.side, 2);
    const double r = r1 + r2;
    switch (kind) {
      case OperatorKind::identity: op.symbol[flat] = 1.0; break;
      case OperatorKind::zero: break;
      case OperatorKind::marcinkiewicz_flag:
        if (r > 0.0) op.symbol[flat] = r2 / r;
        break;
      case OperatorKind::riesz_like:
        if (r > 0.0) op.symbol[flat] = cplx(0.0, -(k[grid.n] / grid.side) / std::sqrt(r));
        break;
      case OperatorKind::custom: break;
    }
  }
  op.l2_norm = sup_abs(op.symbol);
  return op;
}

MultiplierOperator custom_multiplier(const Grid& grid, std::vector<cplx> symbol, std::string params) {
  if (symbol.size() != grid.size()) throw ConfigError("symbol size does not match the grid");
  for (const auto& z : symbol) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ConfigError("symbol is not bounded: non-finite entry");
    }
  }
  MultiplierOperator op;
  op.kind = OperatorKind::custom;
  op.grid = grid;
  op.symbol = std::move(symbol);
  op.l2_norm = sup_abs(op.symbol);
  op.params = std::move(params);
  return op;
}

void save_symbol(const std::filesystem::path& path, const MultiplierOperator& op) {
  io::write_function(path, SampledFunction(op.grid, Domain::base, op.symbol));
  nlohmann::ordered_json j;
  j["kind"] = to_string(op.kind);
  j["params"] = nlohmann::ordered_json::parse(op.params);
  j["l2_norm"] = op.l2_norm;
  io::write_text(std::filesystem::path(path.string() + ".op.json"), j.dump(2) + "\n");
}

MultiplierOperator load_symbol(const std::filesystem::path& path) {
  // Non-finite symbols are rejected before any SampledFunction is built.
  const std::string raw = io::read_text(path);
  if (raw.size() < io::kHeaderBytes) throw IoError("symbol file too short: " + path.string());
  for (std::size_t off = io::kHeaderBytes; off + 8 <= raw.size(); off += 8) {
    if (!std::isfinite(io::read_f64_at(raw, off))) {
      throw ConfigError("symbol file contains a non-finite value: " + path.string());
    }
  }
  const SampledFunction s = io::read_function(path);
  if (s.domain() != Domain::base) throw ConfigError("symbol file must hold a base-domain array");
  std::string params = "{}";
  OperatorKind kind = OperatorKind::custom;
  const std::filesystem::path desc(path.string() + ".op.json");
  if (std::filesystem::exists(desc)) {
    try {
      const auto j = nlohmann::json::parse(io::read_text(desc));
      params = j.value("params", nlohmann::json::object()).dump();
      kind = parse_operator_kind(j.value("kind", std::string("custom")));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("bad operator descriptor: ") + e.what());
    }
  }
  MultiplierOperator op =
      custom_multiplier(s.grid(), std::vector<cplx>(s.values().begin(), s.values().end()), params);
  op.kind = kind;
  return op;
}

SampledFunction apply(const MultiplierOperator& op, const SampledFunction& f) {
  if (!(f.grid() == op.grid) || f.domain() != Domain::base) {
    throw Error("operator grid does not match the function");
  }
  if (op.kind == OperatorKind::identity) return f;
  if (op.kind == OperatorKind::zero) return SampledFunction(f.grid(), Domain::base);
  return apply_multiplier(f, op.symbol);
}

MultiplierOperator compose(const MultiplierOperator& a, const MultiplierOperator& b) {
  if (!(a.grid == b.grid)) throw Error("cannot compose operators on different grids");
  std::vector<cplx> s(a.symbol.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = a.symbol[i] * b.symbol[i];
  return custom_multiplier(a.grid, std::move(s),
                           std::string("{\"composed\":[\"") + to_string(a.kind) + "\",\"" +
                               to_string(b.kind) + "\"]}");
}

double symbol_derivative_ratio(const MultiplierOperator& op, double min_radius) {
  const Grid& g = op.grid;
  const int N = g.samples_per_axis();
  double worst = 0.0;
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    std::vector<int> k = signed_indices(g, flat);
    double r1 = 0.0, r2 = 0.0;
    bool interior = true;
    for (int a = 0; a < g.dims(); ++a) {
      (a < g.n ? r1 : r2) += static_cast<double>(k[a]) * k[a];
      if (std::abs(k[a]) > N / 2 - 3) interior = false;
    }
    r1 = std::sqrt(r1);
    r2 = std::sqrt(r2);
    if (!interior || r1 < min_radius || r2 < min_radius) continue;
    for (int a = 0; a < g.dims(); ++a) {
      auto at = [&](int d) {
        std::vector<int> q = k;
        q[a] += d;
        return op.symbol[flat_of(g, q)];
      };
      const double scale = a < g.n ? r1 : r2;
      const double d1 = std::abs(at(1) - at(-1)) / 2.0;
      const double d2 = std::abs(at(2) - 2.0 * at(0) + at(-2)) / 4.0;
      worst = std::max({worst, d1 * scale, d2 * scale * scale});
    }
  }
  return worst;
}

UniformAtomReport uniform_atom_test(const MultiplierOperator& op,
                                    const std::vector<const AtomicDecomposition*>& decs, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
  UniformAtomReport rep;
  for (std::size_t d = 0; d < decs.size(); ++d) {
    const AtomicDecomposition& dec = *decs[d];
    for (std::size_t n = 0; n < dec.atoms.size(); ++n) {
      const SampledFunction ta = apply(op, dec.atoms[n].values);
      AtomOperatorRow row;
      row.decomposition = d;
      row.atom = n;
      row.lp = lp_norm(ta, p);
      row.hp = hp_norm(ta, dec.plan->bank, p);
      rep.sup_lp = std::max(rep.sup_lp, row.lp);
      rep.sup_hp = std::max(rep.sup_hp, row.hp);
      rep.rows.push_back(row);
    }
  }
  return rep;
}

TransferReport transfer_check(const MultiplierOperator& op, const AtomicDecomposition& d) {
  TransferReport rep;
  const double p = d.p;
  SampledFunction total(op.grid, Domain::base);
  double sup = 0.0;
  for (const Atom& a : d.atoms) {
    SampledFunction ta = apply(op, a.values);
    const double np = lp_norm_pow(ta, p);
    rep.chain += std::pow(a.lambda, p) * np;
    sup = std::max(sup, np);
    total += cplx(a.lambda, 0.0) * ta;
  }
  rep.lhs = lp_norm_pow(total, p);
  rep.sup_bound = d.sum_lambda_p * sup;
  rep.ratio = rep.sup_bound > 0.0 ? rep.lhs / rep.sup_bound : 0.0;
  rep.chain_ratio = rep.chain > 0.0 ? rep.lhs / rep.chain : 0.0;
  return rep;
}

}  // namespace flaghp
