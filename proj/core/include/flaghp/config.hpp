#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flaghp/atomizer.hpp"
#include "flaghp/filter_bank.hpp"
#include "flaghp/signal.hpp"
#include "flaghp/validation.hpp"

namespace flaghp {

/// Everything a batch run depends on. Serialized as `key = value` lines in a
/// fixed key order; floating values use %.17g so parse(format(c)) == c.
struct RunConfig {
  int n = 1;
  int m = 1;
  int L = 7;
  double side = 1.0;

  Profile profile = Profile::meyer_smooth;
  int j_lo = 1, j_hi = 3;
  int k_lo = 1, k_hi = 3;
  int moment_order = 2;

  std::vector<double> p_list{0.6, 0.8, 1.0};
  std::vector<SignalSpec> corpus;
  /// Added to the seed of every band-limited-random corpus entry.
  std::uint64_t seed = 0;
  std::string out = "flaghp-out";

  double enlargement = 0.01;
  double majority = 0.5;
  double dilation = 6.0;
  double hl_cutoff = 0.25;
  int level_span = 40;
  MaximalFamily maximal_family = MaximalFamily::dyadic;
  int max_scale_span = -1;

  /// Derivative count of the smoothness clause; -1 means floor(2/p - 1/2).
  int k_p = -1;
  int k_max = 2;
  int samples = 24;
  std::uint64_t lift_budget = kDefaultLiftBudget;

  double tol_identity = 1e-10;
  double tol_reconstruction = 1e-9;
  double tol_reassembly = 1e-8;
  double tol_moment = 1e-7;
  double tol_marginal = 1e-8;
  double tol_dr_sum = 1e-6;
  double tol_smooth = 1e-9;
  double tol_l2 = 1e-12;
  double tol_transfer = 1e-9;

  /// corpus-run also runs the full validation suite when nonzero.
  int run_validate = 1;

  std::string operator_kind = "marcinkiewicz-flag";
  std::string symbol_path;

  bool operator==(const RunConfig&) const = default;
};

/// Ten signals that are valid on every grid with L in [6, 8] and the default
/// scale ranges. The first four are band-limited inside the covered band.
std::vector<SignalSpec> default_corpus();
RunConfig default_config();

std::string format_config(const RunConfig& c);
/// Parses key = value text on top of `base`. Blank lines and lines starting
/// with '#' are skipped; unknown keys and bad values throw ConfigError.
RunConfig parse_config(const std::string& text, const RunConfig& base);
RunConfig parse_config(const std::string& text);

/// JSON object whose members use the same keys; numbers, strings, booleans
/// or arrays (joined with ',') are accepted.
RunConfig apply_json_override(const RunConfig& base, const std::string& json_text);
/// Dispatches on the extension: `.json` files are overrides of the defaults,
/// anything else is key = value text.
RunConfig load_config(const std::string& path);

/// Throws ConfigError when a field is out of its admissible range.
void validate(const RunConfig& c);

/// 64-bit FNV-1a of format_config(c) with the output directory blanked, as
/// 16 hex digits: the same computation hashes the same wherever it writes.
std::string config_hash(const RunConfig& c);

Grid config_grid(const RunConfig& c);
ScaleRange config_j_range(const RunConfig& c);
ScaleRange config_k_range(const RunConfig& c);
AtomizerConfig atomizer_config(const RunConfig& c);
ValidationConfig validation_config(const RunConfig& c, double p);
int effective_k_p(const RunConfig& c, double p);
/// The corpus entry with the config seed applied.
SignalSpec corpus_entry(const RunConfig& c, std::size_t index);

std::vector<double> parse_p_list(const std::string& text);

}  // namespace flaghp
