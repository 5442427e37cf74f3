#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "flaghp/config.hpp"
#include "flaghp/error.hpp"

namespace flaghp {

/// Process exit codes of the batch commands.
enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitConfig = 2 };

/// A missing or inconsistent on-disk artifact (exit code 1).
class ArtifactError : public Error {
 public:
  using Error::Error;
};

/// Where a command's input signal comes from: a corpus index, a binary array
/// file, or an inline signal recipe. Exactly one should be set; the default
/// is corpus entry 0.
struct InputRef {
  std::optional<std::size_t> corpus_index;
  std::filesystem::path file;
  std::string spec;
};

struct ResolvedInput {
  std::string label;  ///< directory name used below --out
  SampledFunction f;
};

ResolvedInput resolve_input(const RunConfig& cfg, const InputRef& in);

/// Resolution identity and kernel moments. With `bank_dir` the windows are
/// loaded from disk instead of being rebuilt; otherwise the fresh bank is
/// saved to <out>/bank. Writes <out>/filters-check.json.
int cmd_filters_check(const RunConfig& cfg, std::ostream& log,
                      const std::optional<std::filesystem::path>& bank_dir = std::nullopt);

/// For each p of the config writes <out>/<label>/p_<p>/ with manifest.json,
/// atoms/atom_<n>.bin, particles/*.bin for the sampled rectangles and
/// atoms.csv. Also stores the input as <out>/<label>/input.bin.
int cmd_decompose(const RunConfig& cfg, const InputRef& in, std::ostream& log);

/// Recomputes the decomposition behind `manifest`, checks it against the
/// stored artifacts and runs the validation suite. Writes validation.json and
/// atom_reports.csv next to the manifest.
int cmd_validate(const RunConfig& cfg, const std::filesystem::path& manifest, std::ostream& log);

/// analyze followed by reconstruct; exit 0 iff the relative residual meets
/// tol.reconstruction.
int cmd_reconstruct(const RunConfig& cfg, const InputRef& in, std::ostream& log);

/// ||g_F(f)||_p for every configured p (any p > 0).
int cmd_norm(const RunConfig& cfg, const InputRef& in, std::ostream& log);

/// uniform_atom_test and transfer_check over the corpus decompositions.
int cmd_operator_test(const RunConfig& cfg, std::ostream& log);

/// Reconstruction, decomposition and (optionally) validation of every corpus
/// entry for every p. Writes <out>/corpus/... and <out>/corpus-report.json.
int cmd_corpus_run(const RunConfig& cfg, std::ostream& log);

/// Directory name for one exponent, e.g. "p_0.8".
std::string p_label(double p);

/// Reported constants as a JSON object: thresholds, window support
/// constants, the measured kernel constant A and k_p for every configured p.
std::string constants_json(const RunConfig& cfg, const FilterBank& bank);

}  // namespace flaghp
