// Batch driver for the flag Hardy space toolkit.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flaghp/config.hpp"
#include "flaghp/pipeline.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string json_override;
  std::vector<std::string> sets;
  std::string p_list;
  std::optional<int> grid_L;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::string out;

  std::optional<std::size_t> corpus_index;
  std::string input_file;
  std::string signal;
  std::string manifest;
  std::string bank_dir;
  std::string operator_kind;
  std::string symbol;
};

flaghp::RunConfig resolve_config(const Options& o) {
  flaghp::RunConfig c =
      o.config_path.empty() ? flaghp::default_config() : flaghp::load_config(o.config_path);
  if (!o.json_override.empty()) c = flaghp::apply_json_override(c, o.json_override);
  for (const auto& s : o.sets) c = flaghp::parse_config(s, c);
  if (!o.p_list.empty()) c.p_list = flaghp::parse_p_list(o.p_list);
  if (o.grid_L) c.L = *o.grid_L;
  if (!o.profile.empty()) c.profile = flaghp::parse_profile(o.profile);
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.out = o.out;
  if (!o.operator_kind.empty()) c.operator_kind = o.operator_kind;
  if (!o.symbol.empty()) {
    c.symbol_path = o.symbol;
    c.operator_kind = "custom";
  }
  flaghp::validate(c);
  return c;
}

flaghp::InputRef input_of(const Options& o) {
  flaghp::InputRef in;
  in.corpus_index = o.corpus_index;
  in.file = o.input_file;
  in.spec = o.signal;
  return in;
}

void add_input_options(CLI::App* sub, Options& o) {
  sub->add_option("--corpus", o.corpus_index, "Corpus entry index (default 0)");
  sub->add_option("--input", o.input_file, "Binary array file holding the signal");
  sub->add_option("--signal", o.signal, "Inline signal recipe, e.g. 'gaussian-bump;widths=0.05'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flag Littlewood-Paley analysis, atomic decomposition and atom validation"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "key = value config file (.json: JSON override)");
  app.add_option("--json", o.json_override, "JSON object applied on top of the config");
  app.add_option("--set", o.sets, "Single key=value override (repeatable)");
  app.add_option("--p", o.p_list, "Comma-separated exponents");
  app.add_option("--grid-L", o.grid_L, "Samples per axis = 2^L");
  app.add_option("--profile", o.profile, "meyer-smooth | shannon-sharp");
  app.add_option("--seed", o.seed, "Seed offset for random corpus entries");
  app.add_option("--out", o.out, "Output directory");

  auto* filters = app.add_subcommand("filters-check", "Resolution identity and kernel moments");
  filters->add_option("--bank", o.bank_dir, "Check a saved bank directory instead");
  auto* decompose = app.add_subcommand("decompose", "Atomic decomposition of one signal");
  add_input_options(decompose, o);
  auto* validate = app.add_subcommand("validate", "Validate a stored decomposition");
  validate->add_option("manifest", o.manifest, "manifest.json written by decompose")->required();
  auto* reconstruct = app.add_subcommand("reconstruct", "Analysis followed by reconstruction");
  add_input_options(reconstruct, o);
  auto* norm = app.add_subcommand("norm", "Flag Hardy norms of one signal");
  add_input_options(norm, o);
  auto* optest = app.add_subcommand("operator-test", "Uniform atom test and transfer chain");
  optest->add_option("--operator", o.operator_kind,
                     "identity | zero | marcinkiewicz-flag | riesz-like");
  optest->add_option("--symbol", o.symbol, "Symbol file (binary array of multiplier values)");
  auto* corpus = app.add_subcommand("corpus-run", "Full pipeline over the configured corpus");
  auto* show = app.add_subcommand("config", "Print the resolved configuration and its hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return flaghp::kExitConfig;
  }

  try {
    const flaghp::RunConfig cfg = resolve_config(o);
    if (*show) {
      std::cout << "# hash " << flaghp::config_hash(cfg) << "\n" << flaghp::format_config(cfg);
      return flaghp::kExitPass;
    }
    if (*filters) {
      std::optional<std::filesystem::path> bank;
      if (!o.bank_dir.empty()) bank = o.bank_dir;
      return flaghp::cmd_filters_check(cfg, std::cout, bank);
    }
    if (*decompose) return flaghp::cmd_decompose(cfg, input_of(o), std::cout);
    if (*validate) return flaghp::cmd_validate(cfg, o.manifest, std::cout);
    if (*reconstruct) return flaghp::cmd_reconstruct(cfg, input_of(o), std::cout);
    if (*norm) return flaghp::cmd_norm(cfg, input_of(o), std::cout);
    if (*optest) return flaghp::cmd_operator_test(cfg, std::cout);
    if (*corpus) return flaghp::cmd_corpus_run(cfg, std::cout);
  } catch (const flaghp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return flaghp::kExitConfig;
  } catch (const flaghp::ArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return flaghp::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return flaghp::kExitFailure;
  }
  return flaghp::kExitConfig;
}
