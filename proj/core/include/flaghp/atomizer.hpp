#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flaghp/filter_bank.hpp"
#include "flaghp/flag_transform.hpp"
#include "flaghp/maximal.hpp"

namespace flaghp {

struct AtomizerConfig {
  double enlargement_threshold = 0.01;  ///< Omega~ = {M_s chi_Omega > this}
  double majority = 0.5;                ///< R in R_i iff |R cap Omega_i| > majority |R|
  double dilation = 6.0;                ///< support-leak dilation factor
  /// Levels below i_max - level_span are folded into the bottom level.
  int level_span = 40;
  MaximalConfig maximal;
};

/// Omega_i = {gsup > 2^i} for i_min < i <= i_max, and Omega_{i_min} is the
/// whole detected support {gsup > 0}. Empty when gsup vanishes.
struct LevelFamily {
  int i_min = 0;
  int i_max = -1;
  std::vector<SampledSet> omega;        ///< indexed by i - i_min
  std::vector<SampledSet> omega_tilde;  ///< indexed by i - i_min

  bool empty() const { return i_max < i_min; }
  const SampledSet& at(int i) const { return omega.at(static_cast<std::size_t>(i - i_min)); }
  const SampledSet& tilde_at(int i) const {
    return omega_tilde.at(static_cast<std::size_t>(i - i_min));
  }
  /// max_i |Omega~_i| / |Omega_i|.
  double enlargement_constant() const;
};

LevelFamily build_level_family(const SampledFunction& gsup, const AtomizerConfig& cfg);

/// Per-sample top level: the largest i with x in Omega_i, or i_min - 1.
std::vector<int> level_map(const LevelFamily& levels);

struct RectangleAssignment {
  /// byLevel[i - i_min] lists the rectangles of R_i, ordered by (sp, index).
  std::vector<std::vector<FlagRectangle>> by_level;
  int i_min = 0;
  std::size_t unassigned = 0;

  const std::vector<FlagRectangle>& at(int i) const {
    return by_level.at(static_cast<std::size_t>(i - i_min));
  }
};

RectangleAssignment assign_rectangles(const LevelFamily& levels, const FilterBank& bank,
                                      double majority = 0.5);

/// Level of one rectangle (largest i with |R cap Omega_i| > majority |R|),
/// or i_min - 1 when it never qualifies.
int rectangle_level(const Grid& grid, const FlagRectangle& r, const std::vector<int>& level_map,
                    int i_min, double majority);

/// f_R = psi_{j,k} * (chi_R f_{j,k}).
SampledFunction build_particle(const FlagCoefficients& c, const FlagRectangle& r);

/// ||f_jk||_{L^2(R)}^2, the coefficient energy on R.
double rectangle_energy(const FlagCoefficients& c, const FlagRectangle& r);

/// m(R, S): ratio of the smaller to the larger side measures.
double rect_incomparability(const Grid& grid, const FlagRectangle& r, const FlagRectangle& s);
double rect_incomparability(double i_r, double j_r, double i_s, double j_s);

/// L^2 mass of f outside the concentric `dilation`-fold dilate of R,
/// relative to ||f||_2 (0 for f = 0).
double particle_leak(const SampledFunction& f, const FlagRectangle& r, double dilation);

/// Everything of the decomposition that does not depend on p.
struct LevelPlan {
  int i = 0;
  std::vector<FlagRectangle> rectangles;
  double omega_measure = 0.0;
  double omega_tilde_measure = 0.0;
  SampledFunction sum;     ///< sum_{R in R_i} f_R
  double sum_l2 = 0.0;     ///< ||sum||_2
  double energy = 0.0;     ///< sum_R ||f_jk||^2_{L^2(R)}
};

struct DecompositionPlan {
  std::shared_ptr<const FilterBank> bank;
  AtomizerConfig config;
  SampledFunction f;
  FlagCoefficients coefficients;
  SampledFunction gsup;
  LevelFamily levels;
  RectangleAssignment assignment;
  std::vector<LevelPlan> used;  ///< levels with a nonempty R_i, by i
  SampledFunction coarse;       ///< coarse remainder
};

DecompositionPlan plan_decomposition(const SampledFunction& f,
                                     std::shared_ptr<const FilterBank> bank,
                                     const AtomizerConfig& cfg);

struct Atom {
  int i = 0;
  double lambda = 0.0;
  /// a_i = normalization * sum_{R in R_i} f_R, normalization = 1 / lambda.
  double normalization = 0.0;
  SampledFunction values;
  const LevelPlan* level = nullptr;  ///< points into the owning plan
  double support_leak = 0.0;
};

struct AtomicDecomposition {
  std::shared_ptr<const DecompositionPlan> plan;
  double p = 1.0;
  std::vector<Atom> atoms;
  SampledFunction coarse_remainder;
  double C = 0.0;
  double C_l2 = 0.0;  ///< smallest C with ||a_i||_2 <= |Omega~_i|^{1/2-1/p}
  double C_12 = 0.0;  ///< smallest C with the d_R sum bound
  double kernel_constant = 0.0;
  double sum_lambda_p = 0.0;
  double hp_norm_p = 0.0;  ///< ||g_F(f)||_p^p
  double reassembly_residual = 0.0;
  double enlargement_constant = 0.0;
};

/// Chooses lambda_i = C 2^i |Omega_i|^{1/p} with the smallest C for which
/// every atom meets both the L^2 size bound and the d_R sum bound.
AtomicDecomposition calibrate(std::shared_ptr<const DecompositionPlan> plan, double p);

AtomicDecomposition decompose(const SampledFunction& f, std::shared_ptr<const FilterBank> bank,
                              double p, const AtomizerConfig& cfg = {});

/// sum_i lambda_i a_i (without the coarse remainder).
SampledFunction atomic_sum(const AtomicDecomposition& d);

/// JSON manifest: p, C, constants and per-atom records.
std::string decomposition_manifest(const AtomicDecomposition& d);

}  // namespace flaghp
