#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "flaghp/io.hpp"
#include "flaghp/operators.hpp"
#include "flaghp/pipeline.hpp"
#include "json.hpp"

using namespace flaghp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "flaghp-pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_config(const fs::path& out) {
  RunConfig c = default_config();
  c.L = 6;
  c.out = out.string();
  return c;
}

json read_json(const fs::path& p) { return json::parse(io::read_text(p)); }

// Runs the command-line tool and returns its exit status.
int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLAGHP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(FiltersCheck, DefaultBankPasses) {
  const fs::path out = scratch("fc-default");
  std::ostringstream log;
  EXPECT_EQ(cmd_filters_check(small_config(out), log), kExitPass) << log.str();
  const json rep = read_json(out / "filters-check.json");
  EXPECT_TRUE(rep["pass"].get<bool>());
  EXPECT_LE(rep["identity"]["deviation"].get<double>(), 1e-10);
  EXPECT_TRUE(fs::exists(out / "bank" / "windows.bin"));
  EXPECT_EQ(rep["config_hash"].get<std::string>(), config_hash(small_config(out)));
}

TEST(FiltersCheck, ShannonIdentityIsExact) {
  const fs::path out = scratch("fc-shannon");
  RunConfig c = small_config(out);
  c.profile = Profile::shannon_sharp;
  std::ostringstream log;
  EXPECT_EQ(cmd_filters_check(c, log), kExitPass);
  EXPECT_EQ(read_json(out / "filters-check.json")["identity"]["deviation"].get<double>(), 0.0);
}

TEST(FiltersCheck, CorruptedWindowFailsAndNamesTheFrequency) {
  const fs::path out = scratch("fc-corrupt");
  const RunConfig c = small_config(out);
  std::ostringstream first;
  ASSERT_EQ(cmd_filters_check(c, first), kExitPass);

  // Halve the peak of the j = 2 first-factor window at frequency (8, 0).
  const int N = 64;
  const std::size_t window = static_cast<std::size_t>(N) * N;
  const std::size_t offset = 12 + 8 * (window + 8 * N + 0);
  {
    std::fstream f(out / "bank" / "windows.bin", std::ios::in | std::ios::out | std::ios::binary);
    double v = 0.0;
    f.seekg(static_cast<std::streamoff>(offset));
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    ASSERT_NEAR(v, 1.0, 1e-12);
    v = 0.5;
    f.seekp(static_cast<std::streamoff>(offset));
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  const fs::path out2 = scratch("fc-corrupt-check");
  RunConfig c2 = c;
  c2.out = out2.string();
  std::ostringstream log;
  EXPECT_EQ(cmd_filters_check(c2, log, out / "bank"), kExitFailure);
  EXPECT_NE(log.str().find("FAIL at frequency (8, 0)"), std::string::npos) << log.str();
  const json rep = read_json(out2 / "filters-check.json");
  EXPECT_FALSE(rep["pass"].get<bool>());
  EXPECT_EQ(rep["identity"]["worst_frequency"], json::array({8.0, 0.0}));
  EXPECT_EQ(run_cli("--grid-L 6 --out " + q(out2) + " filters-check --bank " + q(out / "bank")), 1);
}

TEST(Decompose, FirstCorpusEntryAtPOne) {
  const fs::path out = scratch("dec");
  RunConfig c = small_config(out);
  c.p_list = {1.0};
  std::ostringstream log;
  ASSERT_EQ(cmd_decompose(c, InputRef{0, {}, {}}, log), kExitPass) << log.str();
  const fs::path dir = out / "corpus-0" / "p_1";
  const json m = read_json(dir / "manifest.json");
  ASSERT_GE(m["atoms"].size(), 1u);
  EXPECT_LE(m["reassembly_residual"].get<double>(), 1e-8);
  EXPECT_EQ(m["config_hash"].get<std::string>(), config_hash(c));
  EXPECT_TRUE(fs::exists(out / "corpus-0" / "input.bin"));
  EXPECT_TRUE(fs::exists(dir / "atoms" / "atom_0.bin"));
  EXPECT_TRUE(fs::exists(dir / "atoms.csv"));
  EXPECT_EQ(m["particles"].size(), static_cast<std::size_t>(c.samples));
  for (const auto& p : m["particles"]) EXPECT_TRUE(fs::exists(dir / p["file"].get<std::string>()));
}

TEST(Decompose, ZeroSignalGivesAnEmptyManifest) {
  const fs::path out = scratch("dec-zero");
  io::write_function(out / "zero.bin", SampledFunction(make_grid(1, 1, 6)));
  RunConfig c = small_config(out);
  c.p_list = {0.8};
  std::ostringstream log;
  EXPECT_EQ(cmd_decompose(c, InputRef{std::nullopt, out / "zero.bin", {}}, log), kExitPass) << log.str();
  const json m = read_json(out / "zero" / "p_0.8" / "manifest.json");
  EXPECT_TRUE(m["atoms"].empty());
  EXPECT_EQ(m["sum_lambda_p"].get<double>(), 0.0);
}

TEST(Decompose, ExponentAboveOneIsAConfigError) {
  const fs::path out = scratch("dec-p");
  RunConfig c = small_config(out);
  c.p_list = {1.5};
  std::ostringstream log;
  EXPECT_THROW(cmd_decompose(c, InputRef{0, {}, {}}, log), ConfigError);
  EXPECT_EQ(run_cli("--grid-L 6 --p 1.5 --out " + q(out) + " decompose --corpus 0"), 2);
  EXPECT_EQ(run_cli("--grid-L 6 --set nonsense=1 --out " + q(out) + " decompose"), 2);
  // The norm is defined for every p > 0.
  EXPECT_EQ(run_cli("--grid-L 6 --p 2 --out " + q(out) + " norm --corpus 0"), 0);
}

TEST(Decompose, GridMismatchOfAnInputFileIsRejected) {
  const fs::path out = scratch("dec-grid");
  io::write_function(out / "coarse.bin", SampledFunction(make_grid(1, 1, 5)));
  std::ostringstream log;
  EXPECT_ANY_THROW(cmd_decompose(small_config(out), InputRef{std::nullopt, out / "coarse.bin", {}}, log));
}

class ValidateTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = new fs::path(scratch("val"));
    RunConfig c = small_config(*out_);
    c.p_list = {0.8};
    std::ostringstream log;
    ASSERT_EQ(cmd_decompose(c, InputRef{4, {}, {}}, log), kExitPass);
  }
  static void TearDownTestSuite() { delete out_; }
  static RunConfig config() {
    RunConfig c = small_config(*out_);
    c.p_list = {0.8};
    return c;
  }
  static fs::path manifest() { return *out_ / "corpus-4" / "p_0.8" / "manifest.json"; }
  static fs::path* out_;
};
fs::path* ValidateTest::out_ = nullptr;

TEST_F(ValidateTest, FreshRunPasses) {
  std::ostringstream log;
  EXPECT_EQ(cmd_validate(config(), manifest(), log), kExitPass) << log.str();
  const json v = read_json(manifest().parent_path() / "validation.json");
  EXPECT_TRUE(v["pass"].get<bool>());
  EXPECT_TRUE(fs::exists(manifest().parent_path() / "atom_reports.csv"));
  EXPECT_EQ(run_cli("--grid-L 6 --p 0.8 --out " + q(*out_) + " validate " + q(manifest())), 0);
}

TEST_F(ValidateTest, ZeroMomentToleranceFails) {
  RunConfig c = config();
  c.tol_moment = 0.0;
  std::ostringstream log;
  EXPECT_EQ(cmd_validate(c, manifest(), log), kExitFailure);
  EXPECT_EQ(run_cli("--grid-L 6 --p 0.8 --set tol.moment=0 --out " + q(*out_) + " validate " + q(manifest())), 1);
}

TEST_F(ValidateTest, ConfigDifferentFromTheManifestIsDetected) {
  RunConfig c = config();
  c.profile = Profile::shannon_sharp;
  std::ostringstream log;
  EXPECT_NE(cmd_validate(c, manifest(), log), kExitPass);
}

TEST_F(ValidateTest, MissingParticleIsAnArtifactError) {
  // Runs last in the suite: it damages the shared output.
  const fs::path victim = manifest().parent_path() / "particles";
  ASSERT_TRUE(fs::exists(victim));
  fs::remove(*fs::directory_iterator(victim));
  std::ostringstream log;
  EXPECT_THROW(cmd_validate(config(), manifest(), log), ArtifactError);
  EXPECT_EQ(run_cli("--grid-L 6 --p 0.8 --out " + q(*out_) + " validate " + q(manifest())), 1);
  EXPECT_EQ(run_cli("--grid-L 6 --p 0.8 validate " + q(*out_ / "nowhere" / "manifest.json")), 1);
}

TEST(Reconstruct, CorpusEntryRoundTrips) {
  const fs::path out = scratch("rec");
  std::ostringstream log;
  EXPECT_EQ(cmd_reconstruct(small_config(out), InputRef{7, {}, {}}, log), kExitPass) << log.str();
  const json r = read_json(out / "corpus-7" / "reconstruct.json");
  EXPECT_LE(r["relative_residual"].get<double>(), 1e-9);
  EXPECT_TRUE(fs::exists(out / "corpus-7" / "reconstructed.bin"));
}

TEST(Norm, EnergyIdentityAtPTwo) {
  const fs::path out = scratch("norm");
  RunConfig c = small_config(out);
  c.p_list = {2.0, 0.8};
  std::ostringstream log;
  EXPECT_EQ(cmd_norm(c, InputRef{1, {}, {}}, log), kExitPass);
  const json r = read_json(out / "corpus-1" / "norm.json");
  EXPECT_LE(r["norms"][0]["energy_identity_deviation"].get<double>(), 1e-9);
  EXPECT_GT(r["norms"][1]["hp_norm"].get<double>(), 0.0);
}

TEST(OperatorTest, IdentityReproducesTheBaseline) {
  const fs::path out = scratch("op-id");
  RunConfig c = small_config(out);
  c.operator_kind = "identity";
  c.corpus.resize(3);
  std::ostringstream log;
  EXPECT_EQ(cmd_operator_test(c, log), kExitPass) << log.str();
  const json r = read_json(out / "operator-test.json");
  for (const auto& e : r["results"]) EXPECT_TRUE(e["baseline_match"].get<bool>());
}

TEST(OperatorTest, InfiniteSymbolFileIsRejected) {
  const fs::path out = scratch("op-inf");
  const Grid g = make_grid(1, 1, 6);
  save_symbol(out / "sym.bin", build_multiplier(OperatorKind::identity, g));
  {
    std::fstream f(out / "sym.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(io::kHeaderBytes + 16 * 3));
    const double inf = std::numeric_limits<double>::infinity();
    f.write(reinterpret_cast<const char*>(&inf), sizeof inf);
  }
  RunConfig c = small_config(out);
  c.operator_kind = "custom";
  c.symbol_path = (out / "sym.bin").string();
  std::ostringstream log;
  EXPECT_THROW(cmd_operator_test(c, log), ConfigError);
  EXPECT_EQ(run_cli("--grid-L 6 --out " + q(out) + " operator-test --symbol " + q(out / "sym.bin")), 2);
}

TEST(CorpusRun, RepeatedRunsAreByteIdentical) {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  RunConfig c = small_config(a);
  c.run_validate = 0;
  c.corpus = {c.corpus[0], c.corpus[5], c.corpus[9]};
  std::ostringstream log;
  ASSERT_EQ(cmd_corpus_run(c, log), kExitPass) << log.str();
  c.out = b.string();
  ASSERT_EQ(cmd_corpus_run(c, log), kExitPass);
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a / "corpus")) {
    if (e.path().filename() != "manifest.json") continue;
    const fs::path other = b / fs::relative(e.path(), a);
    EXPECT_EQ(io::read_text(e.path()), io::read_text(other)) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 3u * c.p_list.size());
  const json rep = read_json(a / "corpus-report.json");
  EXPECT_EQ(rep["config_hash"].get<std::string>(), config_hash(c));
  EXPECT_TRUE(rep["pass"].get<bool>());
}
