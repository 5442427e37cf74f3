#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flaghp/atomizer.hpp"

namespace flaghp {

enum class OperatorKind { identity, zero, marcinkiewicz_flag, riesz_like, custom };

const char* to_string(OperatorKind k);
OperatorKind parse_operator_kind(const std::string& s);

/// Fourier multiplier on the base DFT grid.
struct MultiplierOperator {
  OperatorKind kind = OperatorKind::identity;
  Grid grid{};
  std::vector<cplx> symbol;
  double l2_norm = 0.0;  ///< sup |symbol|
  std::string params = "{}";
};

/// Builtin symbols (frequencies in cycles per unit; value 0 at the singular
/// frequencies):
///   identity            1
///   zero                0
///   marcinkiewicz-flag  |xi2|^2 / (|xi1|^2 + |xi2|^2)
///   riesz-like          -i xi2_0 / |xi|   (first second-factor coordinate)
MultiplierOperator build_multiplier(OperatorKind kind, const Grid& grid);

/// Wraps an explicit symbol; throws ConfigError for non-finite entries.
MultiplierOperator custom_multiplier(const Grid& grid, std::vector<cplx> symbol,
                                     std::string params = "{}");

/// Symbol file: the binary array format of io.hpp (symbol stored as a base
/// function on the DFT index grid) plus `<path>.op.json` with kind/params.
void save_symbol(const std::filesystem::path& path, const MultiplierOperator& op);
MultiplierOperator load_symbol(const std::filesystem::path& path);

SampledFunction apply(const MultiplierOperator& op, const SampledFunction& f);

/// Operator whose symbol is the pointwise product.
MultiplierOperator compose(const MultiplierOperator& a, const MultiplierOperator& b);

/// max over lattice points with |xi1|, |xi2| >= min_radius (in frequency
/// steps) of |xi_group|^q |Delta^q symbol| for single-axis centred
/// differences of order q <= 2. Bounded for Marcinkiewicz-type symbols.
double symbol_derivative_ratio(const MultiplierOperator& op, double min_radius = 4.0);

struct AtomOperatorRow {
  std::size_t decomposition = 0;
  std::size_t atom = 0;
  double lp = 0.0;  ///< ||T a||_p
  double hp = 0.0;  ///< ||T a||_{H^p_F}
};

struct UniformAtomReport {
  double sup_lp = 0.0;
  double sup_hp = 0.0;
  std::vector<AtomOperatorRow> rows;
};

UniformAtomReport uniform_atom_test(const MultiplierOperator& op,
                                    const std::vector<const AtomicDecomposition*>& decs,
                                    double p);

struct TransferReport {
  double lhs = 0.0;         ///< ||T sum lambda_i a_i||_p^p
  double chain = 0.0;       ///< sum lambda_i^p ||T a_i||_p^p
  double sup_bound = 0.0;   ///< sum lambda_i^p * sup_i ||T a_i||_p^p
  double ratio = 0.0;       ///< lhs / sup_bound (0 when f = 0)
  double chain_ratio = 0.0; ///< lhs / chain
};

/// The p-subadditivity chain on the atomic part of a decomposition.
TransferReport transfer_check(const MultiplierOperator& op, const AtomicDecomposition& d);

}  // namespace flaghp
