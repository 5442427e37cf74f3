#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flaghp/atomizer.hpp"

namespace flaghp {

/// sharp: axes (x1, x3, x2), psi1 acts on (x1, x3) and psi2 on x2.
/// tilde: axes (x1, x2, x3), psi1 acts on (x1, x2) and psi2 on x3.
/// In both layouts the first n+m axes carry the psi1 variables and the last
/// m axes the psi2 variable.
enum class Branch { sharp, tilde };

const char* to_string(Branch b);

/// j <= k selects the sharp lift, j > k the tilde lift.
Branch branch_for(ScalePair sp);

inline constexpr std::size_t kDefaultLiftBudget = std::size_t{1} << 24;

struct LiftedParticle {
  FlagRectangle rect;
  Branch branch = Branch::sharp;
  SampledFunction values;      ///< Domain::lifted
  double normalization = 1.0;  ///< the atom factor (C 2^i |Omega_i|^{1/p})^{-1}
  double dR = 0.0;
};

/// Builds the lift of normalization * f_R. Throws Error when the lifted grid
/// has more than `budget` samples.
LiftedParticle lift_particle(const FlagCoefficients& c, const FlagRectangle& r,
                             double normalization, std::size_t budget = kDefaultLiftBudget);

/// Integrates the lift back along x3; equals normalization * f_R.
SampledFunction marginalize(const LiftedParticle& lp);

/// d_R = A |R|^{1/2} ||f_jk||_{L^2(R)} normalization / |R#|, with
/// |R#| = |I| |I^| |J|.
double dR_value(const FlagCoefficients& c, const FlagRectangle& r, double normalization,
                double kernel_constant);

struct MomentEntry {
  int group = 1;               ///< 1: psi1 variables, 2: psi2 variable
  std::vector<int> exponent;   ///< per axis of the group
  int order = 0;
  double residual = 0.0;
};

/// Moments against periodic monomials prod_a t(x_a)^alpha_a with
/// t(x) = side/(2 pi) sin(2 pi (x - c)/side), which agree with (x - c) to
/// second order near the rectangle centre c and are exact trigonometric
/// polynomials of degree |alpha|. Residual = max over the frozen variables of
/// |moment| / (||lp||_inf * integral of |monomial| over the dilated box).
/// `raw` switches to ordinary polynomial moments (wrap-around diagnostic).
std::vector<MomentEntry> check_moments(const LiftedParticle& lp, int max_order,
                                       double dilation = 6.0, bool raw = false);

double max_residual(const std::vector<MomentEntry>& table, int group, int order);

struct SmoothnessEntry {
  int axis = 0;  ///< lifted axis
  int order = 0;
  double ratio = 0.0;  ///< sup |D^order lp| * budget^order / d_R
};

struct DRTable {
  double dR = 0.0;
  double sup_ratio = 0.0;  ///< ||lp||_inf / d_R
  std::vector<SmoothnessEntry> derivatives;
  double max_ratio = 0.0;
};

/// Sup-norm and finite-difference derivative ratios against the budgets
/// d_R / side^q (side of I for psi1 axes, of J for psi2 axes).
DRTable measure_dR(const LiftedParticle& lp, const FlagCoefficients& c, double kernel_constant,
                   int k_max = 2);

/// Leak of the lift outside the dilated pseudo-product box:
/// sharp I x I^ x J, tilde I x J x J^, with I^ and J^ centred at 0.
double lift_leak(const LiftedParticle& lp, double dilation);

/// sum_R d_R^2 |R| |I^_R|^2 / (A |Omega~_i|^{1 - 2/p}).
double check_dR_sum(const AtomicDecomposition& d, std::size_t atom);
/// Same with |Omega_i| in place of |Omega~_i|.
double check_dR_sum_omega(const AtomicDecomposition& d, std::size_t atom);

/// ||g_F(a)||_p.
double check_atom_gf_bound(const SampledFunction& atom, std::shared_ptr<const FilterBank> bank,
                           double p);

struct ValidationConfig {
  int moment_order = 2;
  int k_max = 2;
  double dilation = 6.0;
  std::size_t sample_rectangles = 24;
  std::size_t lift_budget = kDefaultLiftBudget;
  double tol_moment = 1e-7;
  double tol_marginal = 1e-8;
  double tol_dr_sum = 1e-6;
  double tol_smooth = 1e-9;
  double tol_l2 = 1e-12;
};

struct LiftReport {
  std::size_t atom = 0;
  FlagRectangle rect;
  Branch branch = Branch::sharp;
  double marginal_residual = 0.0;
  double moment_group1 = 0.0;  ///< max over orders 0..moment_order
  double moment_group2 = 0.0;
  double raw_moment_group1 = 0.0;
  double raw_moment_group2 = 0.0;
  double smooth_max = 0.0;
  double dR = 0.0;
  double lift_leak = 0.0;
  double particle_leak = 0.0;
  bool pass = true;
};

struct AtomReport {
  std::size_t atom_index = 0;
  int i = 0;
  double lambda = 0.0;
  double l2_ratio = 0.0;        ///< ||a||_2 |Omega~|^{1/2-1/p}
  double l2_ratio_omega = 0.0;  ///< same with |Omega|
  double support_leak = 0.0;
  double moment_residual = 0.0;  ///< over the sampled lifts of this atom
  double dR_sum_ratio = 0.0;
  double dR_sum_ratio_omega = 0.0;
  double gf_bound = 0.0;
  double smooth_max = 0.0;
  std::size_t rectangles = 0;
  std::size_t lifts = 0;
  bool pass = true;
};

struct ValidationResult {
  std::vector<AtomReport> atoms;
  std::vector<LiftReport> lifts;
  std::size_t sharp_lifts = 0;
  std::size_t tilde_lifts = 0;
  double sup_gf_bound = 0.0;
  bool pass = true;
  std::vector<std::string> failures;
};

/// Deterministic sample of (atom, rectangle) pairs: evenly spaced within
/// each branch, both branches represented when available.
std::vector<std::pair<std::size_t, FlagRectangle>> sample_rectangles(const AtomicDecomposition& d,
                                                                     std::size_t count);

ValidationResult validate_decomposition(const AtomicDecomposition& d, const ValidationConfig& cfg);

std::string validation_json(const ValidationResult& r, const ValidationConfig& cfg);
std::string atom_reports_csv(const ValidationResult& r);

}  // namespace flaghp
