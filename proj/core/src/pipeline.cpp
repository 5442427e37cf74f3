#include "flaghp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "flaghp/error.hpp"
#include "flaghp/flag_transform.hpp"
#include "flaghp/io.hpp"
#include "flaghp/maximal.hpp"
#include "flaghp/operators.hpp"
#include "flaghp/ops.hpp"
#include "flaghp/validation.hpp"
#include "json.hpp"

namespace flaghp {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void require_atomic_p(const RunConfig& cfg) {
  for (double p : cfg.p_list) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1], got " + num(p));
  }
}

std::shared_ptr<const FilterBank> make_bank(const RunConfig& cfg) {
  return std::make_shared<const FilterBank>(build_filter_bank(
      config_grid(cfg), config_j_range(cfg), config_k_range(cfg), cfg.profile, cfg.moment_order));
}

json report_header(const std::string& command, const RunConfig& cfg, const FilterBank& bank) {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash(cfg);
  j["constants"] = json::parse(constants_json(cfg, bank));
  return j;
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  io::write_text(path, j.dump(2) + "\n");
}

// Max over |alpha| <= order of |sum t^alpha K| / sum |t^alpha K| for the
// periodic monomials t(x) = side/(2 pi) sin(2 pi x / side) centred at 0.
struct KernelMoment {
  double residual = 0.0;
  std::vector<int> exponent;
};

KernelMoment kernel_moment(const FilterBank& bank, ScalePair sp, int order) {
  const Grid& g = bank.grid();
  const int D = g.dims();
  const int N = g.samples_per_axis();
  const SampledFunction K = kernel_space_side(bank, sp);
  std::vector<double> t(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double x = signed_index(i, N) * g.spacing();
    t[i] = g.side / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * x / g.side);
  }
  KernelMoment worst;
  std::vector<int> alpha(static_cast<std::size_t>(D), 0);
  const auto st = strides(D, N);
  for (;;) {
    int total = 0;
    for (int a : alpha) total += a;
    if (total <= order) {
      cplx acc{};
      double mass = 0.0;
      for (std::size_t flat = 0; flat < K.size(); ++flat) {
        double w = 1.0;
        std::size_t rem = flat;
        for (int a = 0; a < D; ++a) {
          w *= std::pow(t[rem / st[a]], alpha[a]);
          rem %= st[a];
        }
        acc += w * K[flat];
        mass += std::abs(w) * std::abs(K[flat]);
      }
      const double r = mass > 0.0 ? std::abs(acc) / mass : 0.0;
      if (r > worst.residual || worst.exponent.empty()) {
        worst.residual = r;
        worst.exponent = alpha;
      }
    }
    int a = D - 1;
    while (a >= 0 && ++alpha[a] > order) alpha[a--] = 0;
    if (a < 0) break;
  }
  return worst;
}

json rect_json(const FlagRectangle& r) {
  return {{"j", r.sp.j}, {"k", r.sp.k}, {"index", r.index}};
}

FlagRectangle rect_from_json(const json& j) {
  FlagRectangle r;
  r.sp = {j.at("j").get<int>(), j.at("k").get<int>()};
  r.index = j.at("index").get<std::vector<int>>();
  return r;
}

// Measure of {hl_maximal(chi_set) > cutoff} relative to |set|.
double hl_ratio(const SampledSet& set, const RunConfig& cfg) {
  if (set.empty()) return 0.0;
  MaximalConfig mc{cfg.maximal_family, cfg.max_scale_span};
  const SampledFunction m = hl_maximal(set.indicator(), mc);
  const SampledSet big = superlevel(m, cfg.hl_cutoff);
  return big.measure() / set.measure();
}

double rel_sup_diff(const SampledFunction& a, const SampledFunction& b) {
  if (!(a.grid() == b.grid()) || a.domain() != b.domain() || a.size() != b.size()) {
    return std::numeric_limits<double>::infinity();
  }
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

SampledFunction read_artifact(const fs::path& path) {
  if (!fs::exists(path)) throw ArtifactError("missing artifact: " + path.string());
  return io::read_function(path);
}

std::string atoms_csv(const AtomicDecomposition& d, const RunConfig& cfg) {
  std::string out =
      "atom,i,lambda,omega_measure,omega_tilde_measure,rectangles,l2_ratio,support_leak,"
      "hl_ratio\n";
  const auto& plan = *d.plan;
  for (std::size_t n = 0; n < d.atoms.size(); ++n) {
    const Atom& a = d.atoms[n];
    const double l2 = lp_norm(a.values, 2.0);
    out += std::to_string(n) + "," + std::to_string(a.i) + "," + num(a.lambda) + "," +
           num(a.level->omega_measure) + "," + num(a.level->omega_tilde_measure) + "," +
           std::to_string(a.level->rectangles.size()) + "," +
           num(l2 * std::pow(a.level->omega_tilde_measure, 0.5 - 1.0 / d.p)) + "," +
           num(a.support_leak) + "," + num(hl_ratio(plan.levels.tilde_at(a.i), cfg)) + "\n";
  }
  return out;
}

// Manifest of one decomposition: the library manifest plus provenance of
// the run and the list of stored artifacts.
json decomposition_json(const AtomicDecomposition& d, const RunConfig& cfg,
                        const std::string& input_name) {
  json j = json::parse(decomposition_manifest(d));
  j["config_hash"] = config_hash(cfg);
  j["constants"] = json::parse(constants_json(cfg, *d.plan->bank));
  j["input"] = input_name;
  return j;
}

}  // namespace

std::string p_label(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "p_%g", p);
  return buf;
}

std::string constants_json(const RunConfig& cfg, const FilterBank& bank) {
  json j;
  j["enlargement"] = cfg.enlargement;
  j["majority"] = cfg.majority;
  j["dilation"] = cfg.dilation;
  j["hl_cutoff"] = cfg.hl_cutoff;
  j["level_span"] = cfg.level_span;
  j["maximal_family"] = to_string(cfg.maximal_family);
  j["max_scale_span"] = cfg.max_scale_span;
  j["c1"] = bank.c1();
  j["c2"] = bank.c2();
  j["kernel_constant"] = bank.kernel_constant();
  j["moment_order"] = bank.moment_order();
  json kp = json::object();
  for (double p : cfg.p_list) kp[p_label(p)] = effective_k_p(cfg, p);
  j["k_p"] = kp;
  j["k_max"] = cfg.k_max;
  return j.dump();
}

ResolvedInput resolve_input(const RunConfig& cfg, const InputRef& in) {
  const int given = (in.corpus_index ? 1 : 0) + (in.file.empty() ? 0 : 1) + (in.spec.empty() ? 0 : 1);
  if (given > 1) throw ConfigError("give at most one of a corpus index, an input file or a signal");
  const Grid grid = config_grid(cfg);
  if (!in.file.empty()) {
    if (!fs::exists(in.file)) throw ArtifactError("missing input file: " + in.file.string());
    SampledFunction f = io::read_function(in.file);
    if (!(f.grid() == grid) || f.domain() != Domain::base) {
      throw ConfigError("input file grid does not match the configured grid: " + in.file.string());
    }
    return {in.file.stem().string(), std::move(f)};
  }
  if (!in.spec.empty()) {
    const SignalSpec s = parse_signal_spec(in.spec);
    return {std::string("signal-") + to_string(s.kind), synthesize(s, grid)};
  }
  const std::size_t idx = in.corpus_index.value_or(0);
  return {"corpus-" + std::to_string(idx), synthesize(corpus_entry(cfg, idx), grid)};
}

int cmd_filters_check(const RunConfig& cfg, std::ostream& log,
                      const std::optional<fs::path>& bank_dir) {
  validate(cfg);
  std::shared_ptr<const FilterBank> bank;
  if (bank_dir) {
    if (!fs::exists(*bank_dir)) throw ArtifactError("missing bank directory: " + bank_dir->string());
    bank = std::make_shared<const FilterBank>(load_bank(*bank_dir));
  } else {
    bank = make_bank(cfg);
    save_bank(fs::path(cfg.out) / "bank", *bank);
  }

  json rep = report_header("filters-check", cfg, *bank);
  rep["profile"] = to_string(bank->profile());
  rep["j_range"] = {bank->j_range().lo, bank->j_range().hi};
  rep["k_range"] = {bank->k_range().lo, bank->k_range().hi};
  bool pass = true;

  const IdentityCheck id = check_resolution_identity_detail(*bank);
  const bool id_ok = id.deviation <= cfg.tol_identity;
  rep["identity"] = {{"deviation", id.deviation},
                     {"product", id.product},
                     {"first", id.first},
                     {"second", id.second},
                     {"worst_index", id.worst_index},
                     {"worst_frequency", id.worst_frequency},
                     {"tolerance", cfg.tol_identity},
                     {"pass", id_ok}};
  log << "resolution identity: deviation " << sci(id.deviation);
  if (!id_ok) {
    pass = false;
    log << " FAIL at frequency (";
    for (std::size_t a = 0; a < id.worst_frequency.size(); ++a) {
      log << (a ? ", " : "") << id.worst_frequency[a];
    }
    log << ")";
  }
  log << "\n";

  json moments = json::array();
  for (const ScalePair sp : bank->scale_pairs()) {
    const KernelMoment km = kernel_moment(*bank, sp, bank->moment_order());
    const bool ok = km.residual <= cfg.tol_moment;
    moments.push_back({{"j", sp.j},
                       {"k", sp.k},
                       {"residual", km.residual},
                       {"worst_exponent", km.exponent},
                       {"pass", ok}});
    if (!ok) {
      pass = false;
      int order = 0;
      for (int a : km.exponent) order += a;
      log << "kernel moment FAIL at (j=" << sp.j << ", k=" << sp.k << "), order " << order
          << ": residual " << sci(km.residual) << "\n";
    }
  }
  rep["kernel_moments"] = moments;
  rep["pass"] = pass;
  write_json(fs::path(cfg.out) / "filters-check.json", rep);
  log << "filters-check: " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kExitPass : kExitFailure;
}


namespace {

constexpr double kArtifactTolerance = 1e-12;

std::shared_ptr<const DecompositionPlan> make_plan(const SampledFunction& f,
                                                   std::shared_ptr<const FilterBank> bank,
                                                   const RunConfig& cfg) {
  return std::make_shared<const DecompositionPlan>(
      plan_decomposition(f, std::move(bank), atomizer_config(cfg)));
}

std::string atom_file(std::size_t n) { return "atoms/atom_" + std::to_string(n) + ".bin"; }
std::string particle_file(std::size_t k) {
  return "particles/particle_" + std::to_string(k) + ".bin";
}

// Writes manifest, atoms and atoms.csv; with `particles` also the sampled
// particles that cmd_validate cross-checks.
json write_decomposition(const fs::path& dir, const AtomicDecomposition& d, const RunConfig& cfg,
                         const std::string& input_name, bool particles) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  json m = decomposition_json(d, cfg, input_name);
  json files = json::array();
  for (std::size_t n = 0; n < d.atoms.size(); ++n) {
    fs::create_directories(dir / "atoms");
    io::write_function(dir / atom_file(n), d.atoms[n].values);
    files.push_back(atom_file(n));
  }
  m["atom_files"] = files;
  json parts = json::array();
  if (particles) {
    const FlagCoefficients& c = d.plan->coefficients;
    std::size_t k = 0;
    for (const auto& [n, rect] : sample_rectangles(d, static_cast<std::size_t>(cfg.samples))) {
      SampledFunction fr = build_particle(c, rect);
      fr *= cplx(d.atoms[n].normalization, 0.0);
      fs::create_directories(dir / "particles");
      io::write_function(dir / particle_file(k), fr);
      json e = rect_json(rect);
      e["atom"] = n;
      e["file"] = particle_file(k);
      parts.push_back(e);
      ++k;
    }
  }
  m["particles"] = parts;
  io::write_text(dir / "manifest.json", m.dump(2) + "\n");
  io::write_text(dir / "atoms.csv", atoms_csv(d, cfg));
  return m;
}

std::string decomposition_line(const AtomicDecomposition& d) {
  const double ratio = d.hp_norm_p > 0.0 ? d.sum_lambda_p / d.hp_norm_p : 0.0;
  return p_label(d.p) + ": " + std::to_string(d.atoms.size()) + " atoms, sum lambda^p " +
         sci(d.sum_lambda_p) + " vs ||f||_HpF^p " + sci(d.hp_norm_p) + " (ratio " + sci(ratio) +
         "), reassembly residual " + sci(d.reassembly_residual);
}

}  // namespace

int cmd_decompose(const RunConfig& cfg, const InputRef& in, std::ostream& log) {
  validate(cfg);
  require_atomic_p(cfg);
  const auto bank = make_bank(cfg);
  const ResolvedInput input = resolve_input(cfg, in);
  const fs::path base = fs::path(cfg.out) / input.label;
  fs::create_directories(base);
  io::write_function(base / "input.bin", input.f);
  const auto plan = make_plan(input.f, bank, cfg);

  bool pass = true;
  for (double p : cfg.p_list) {
    const AtomicDecomposition d = calibrate(plan, p);
    const fs::path dir = base / p_label(p);
    write_decomposition(dir, d, cfg, "../input.bin", true);
    log << input.label << " " << decomposition_line(d) << "\n";
    if (!(d.reassembly_residual <= cfg.tol_reassembly)) {
      pass = false;
      log << "  FAIL: reassembly residual above " << sci(cfg.tol_reassembly) << "\n";
    }
    log << "  manifest: " << (dir / "manifest.json").string() << "\n";
  }
  return pass ? kExitPass : kExitFailure;
}

int cmd_validate(const RunConfig& cfg, const fs::path& manifest, std::ostream& log) {
  validate(cfg);
  if (!fs::exists(manifest)) throw ArtifactError("missing manifest: " + manifest.string());
  json m;
  try {
    m = json::parse(io::read_text(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError("manifest does not parse: " + manifest.string() + ": " + e.what());
  }
  const fs::path dir = manifest.parent_path();
  const double p = m.at("p").get<double>();
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("manifest p must lie in (0, 1]");

  const SampledFunction f = read_artifact(dir / m.at("input").get<std::string>());
  if (!(f.grid() == config_grid(cfg))) {
    throw ConfigError("manifest input grid differs from the configured grid");
  }
  const auto bank = make_bank(cfg);
  const AtomicDecomposition d = calibrate(make_plan(f, bank, cfg), p);

  std::vector<std::string> failures;
  const auto& atoms = m.at("atoms");
  const auto& files = m.at("atom_files");
  if (atoms.size() != d.atoms.size() || files.size() != d.atoms.size()) {
    failures.push_back("atom count differs from the manifest (" + std::to_string(atoms.size()) +
                       " stored, " + std::to_string(d.atoms.size()) + " recomputed)");
  } else {
    for (std::size_t n = 0; n < d.atoms.size(); ++n) {
      const double stored = atoms[n].at("lambda").get<double>();
      if (std::abs(stored - d.atoms[n].lambda) > kArtifactTolerance * std::abs(d.atoms[n].lambda)) {
        failures.push_back("atom " + std::to_string(n) + ": lambda differs from the manifest");
      }
      const SampledFunction a = read_artifact(dir / files[n].get<std::string>());
      if (!(rel_sup_diff(a, d.atoms[n].values) <= kArtifactTolerance)) {
        failures.push_back("atom " + std::to_string(n) + ": stored values differ");
      }
    }
  }
  std::size_t particle_checks = 0;
  for (const auto& e : m.at("particles")) {
    const fs::path file = dir / e.at("file").get<std::string>();
    const SampledFunction stored = read_artifact(file);
    const std::size_t n = e.at("atom").get<std::size_t>();
    if (n >= d.atoms.size()) {
      failures.push_back("particle " + file.string() + " names a missing atom");
      continue;
    }
    SampledFunction fr = build_particle(d.plan->coefficients, rect_from_json(e));
    fr *= cplx(d.atoms[n].normalization, 0.0);
    if (!(rel_sup_diff(stored, fr) <= kArtifactTolerance)) {
      failures.push_back("particle " + file.string() + " differs from the recomputed particle");
    }
    ++particle_checks;
  }

  const ValidationConfig vcfg = validation_config(cfg, p);
  const ValidationResult vr = validate_decomposition(d, vcfg);
  for (const auto& msg : vr.failures) failures.push_back(msg);
  if (!(d.reassembly_residual <= cfg.tol_reassembly)) {
    failures.push_back("reassembly residual " + sci(d.reassembly_residual));
  }

  json rep = report_header("validate", cfg, *bank);
  rep["manifest"] = manifest.string();
  rep["p"] = p;
  rep["particle_files_checked"] = particle_checks;
  rep["reassembly_residual"] = d.reassembly_residual;
  rep["validation"] = json::parse(validation_json(vr, vcfg));
  rep["failures"] = failures;
  rep["pass"] = failures.empty();
  write_json(dir / "validation.json", rep);
  io::write_text(dir / "atom_reports.csv", atom_reports_csv(vr));

  log << "validate " << manifest.string() << ": " << d.atoms.size() << " atoms, "
      << vr.lifts.size() << " lifts (" << vr.sharp_lifts << " sharp, " << vr.tilde_lifts
      << " tilde), " << particle_checks << " particle files\n";
  for (const auto& msg : failures) log << "  FAIL: " << msg << "\n";
  log << "validate: " << (failures.empty() ? "pass" : "FAIL") << "\n";
  return failures.empty() ? kExitPass : kExitFailure;
}


namespace {

double relative_l2(const SampledFunction& approx, const SampledFunction& f) {
  SampledFunction diff = approx;
  diff -= f;
  const double fn = lp_norm(f, 2.0);
  const double dn = lp_norm(diff, 2.0);
  return fn > 0.0 ? dn / fn : dn;
}

MultiplierOperator make_operator(const RunConfig& cfg) {
  const Grid grid = config_grid(cfg);
  if (!cfg.symbol_path.empty()) {
    if (!fs::exists(cfg.symbol_path)) throw ArtifactError("missing symbol file: " + cfg.symbol_path);
    MultiplierOperator op = load_symbol(cfg.symbol_path);
    if (!(op.grid == grid)) throw ConfigError("symbol grid does not match the configured grid");
    return op;
  }
  return build_multiplier(parse_operator_kind(cfg.operator_kind), grid);
}

}  // namespace

int cmd_reconstruct(const RunConfig& cfg, const InputRef& in, std::ostream& log) {
  validate(cfg);
  const auto bank = make_bank(cfg);
  const ResolvedInput input = resolve_input(cfg, in);
  const FlagCoefficients c = analyze(input.f, bank);
  const SampledFunction r = reconstruct(c);
  const double residual = relative_l2(r, input.f);
  const bool pass = residual <= cfg.tol_reconstruction;

  const fs::path base = fs::path(cfg.out) / input.label;
  fs::create_directories(base);
  io::write_function(base / "reconstructed.bin", r);
  json rep = report_header("reconstruct", cfg, *bank);
  rep["input"] = input.label;
  rep["relative_residual"] = residual;
  rep["tolerance"] = cfg.tol_reconstruction;
  rep["pass"] = pass;
  write_json(base / "reconstruct.json", rep);
  log << input.label << ": reconstruction residual " << sci(residual) << " "
      << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kExitPass : kExitFailure;
}

int cmd_norm(const RunConfig& cfg, const InputRef& in, std::ostream& log) {
  validate(cfg);
  const auto bank = make_bank(cfg);
  const ResolvedInput input = resolve_input(cfg, in);
  const double l2 = lp_norm(input.f, 2.0);
  json rep = report_header("norm", cfg, *bank);
  rep["input"] = input.label;
  rep["l2_norm"] = l2;
  json norms = json::array();
  for (double p : cfg.p_list) {
    const double v = hp_norm(input.f, bank, p);
    json e = {{"p", p}, {"hp_norm", v}};
    log << input.label << ": ||f||_HpF (p=" << num(p) << ") = " << num(v);
    if (p == 2.0) {
      const double dev = l2 > 0.0 ? std::abs(v - l2) / l2 : v;
      e["energy_identity_deviation"] = dev;
      log << "  (||f||_2 = " << num(l2) << ", relative deviation " << sci(dev) << ")";
    }
    log << "\n";
    norms.push_back(e);
  }
  rep["norms"] = norms;
  write_json(fs::path(cfg.out) / input.label / "norm.json", rep);
  return kExitPass;
}

int cmd_operator_test(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  require_atomic_p(cfg);
  const MultiplierOperator op = make_operator(cfg);
  const auto bank = make_bank(cfg);
  const Grid grid = config_grid(cfg);

  std::vector<std::shared_ptr<const DecompositionPlan>> plans;
  for (std::size_t i = 0; i < cfg.corpus.size(); ++i) {
    plans.push_back(make_plan(synthesize(corpus_entry(cfg, i), grid), bank, cfg));
  }

  json rep = report_header("operator-test", cfg, *bank);
  rep["operator"] = to_string(op.kind);
  rep["operator_params"] = json::parse(op.params);
  rep["symbol_sup"] = op.l2_norm;
  rep["symbol_derivative_ratio"] = symbol_derivative_ratio(op);
  bool pass = true;
  json per_p = json::array();
  for (double p : cfg.p_list) {
    std::vector<AtomicDecomposition> decs;
    decs.reserve(plans.size());
    for (const auto& plan : plans) decs.push_back(calibrate(plan, p));
    std::vector<const AtomicDecomposition*> ptrs;
    double baseline = 0.0;
    for (const auto& d : decs) {
      ptrs.push_back(&d);
      for (const Atom& a : d.atoms) baseline = std::max(baseline, lp_norm(a.values, p));
    }
    const UniformAtomReport u = uniform_atom_test(op, ptrs, p);
    bool ok = std::isfinite(u.sup_lp) && std::isfinite(u.sup_hp);
    json transfers = json::array();
    double worst_ratio = 0.0;
    for (std::size_t n = 0; n < decs.size(); ++n) {
      const TransferReport t = transfer_check(op, decs[n]);
      worst_ratio = std::max(worst_ratio, t.ratio);
      const bool t_ok = t.ratio <= 1.0 + cfg.tol_transfer;
      ok = ok && t_ok;
      transfers.push_back({{"decomposition", n},
                           {"lhs", t.lhs},
                           {"chain", t.chain},
                           {"sup_bound", t.sup_bound},
                           {"ratio", t.ratio},
                           {"chain_ratio", t.chain_ratio},
                           {"pass", t_ok}});
    }
    json e = {{"p", p},
              {"sup_lp", u.sup_lp},
              {"sup_hp", u.sup_hp},
              {"atom_baseline_sup_lp", baseline},
              {"atoms", u.rows.size()},
              {"worst_transfer_ratio", worst_ratio}};
    if (op.kind == OperatorKind::identity) {
      const bool same = u.sup_lp == baseline;
      e["baseline_match"] = same;
      ok = ok && same;
    }
    json rows = json::array();
    for (const auto& r : u.rows) {
      rows.push_back({{"decomposition", r.decomposition}, {"atom", r.atom}, {"lp", r.lp}, {"hp", r.hp}});
    }
    e["rows"] = rows;
    e["transfers"] = transfers;
    e["pass"] = ok;
    per_p.push_back(e);
    pass = pass && ok;
    log << to_string(op.kind) << " " << p_label(p) << ": sup ||Ta||_p " << sci(u.sup_lp)
        << ", sup ||Ta||_HpF " << sci(u.sup_hp) << ", worst transfer ratio " << sci(worst_ratio)
        << " " << (ok ? "pass" : "FAIL") << "\n";
  }
  rep["results"] = per_p;
  rep["pass"] = pass;
  write_json(fs::path(cfg.out) / "operator-test.json", rep);
  return pass ? kExitPass : kExitFailure;
}

int cmd_corpus_run(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  require_atomic_p(cfg);
  const auto bank = make_bank(cfg);
  const Grid grid = config_grid(cfg);
  const fs::path root = fs::path(cfg.out) / "corpus";

  json rep = report_header("corpus-run", cfg, *bank);
  json entries = json::array();
  std::string csv =
      "signal,p,atoms,sum_lambda_p,hp_norm_p,norm_ratio,sup_gf_atom,reassembly_residual,C,C_l2,"
      "C_12,validated,pass\n";
  bool pass = true;
  for (std::size_t i = 0; i < cfg.corpus.size(); ++i) {
    const SignalSpec spec = corpus_entry(cfg, i);
    const std::string label = "corpus-" + std::to_string(i);
    const SampledFunction f = synthesize(spec, grid);
    fs::create_directories(root / label);
    io::write_function(root / label / "input.bin", f);
    const auto plan = make_plan(f, bank, cfg);

    const double rec = relative_l2(reconstruct(plan->coefficients), f);
    const double l2 = lp_norm(f, 2.0);
    const double e2 = hp_norm(f, bank, 2.0);
    const double coarse = lp_norm(plan->coarse, 2.0);
    const bool rec_ok = rec <= cfg.tol_reconstruction;
    json e = {{"signal", label},
              {"spec", format_signal_spec(spec)},
              {"reconstruction_residual", rec},
              {"reconstruction_pass", rec_ok},
              {"l2_norm", l2},
              {"hp_norm_2", e2},
              {"energy_identity_deviation", l2 > 0.0 ? std::abs(e2 - l2) / l2 : e2},
              {"out_of_band_fraction", l2 > 0.0 ? coarse / l2 : 0.0}};
    pass = pass && rec_ok;
    log << label << " (" << format_signal_spec(spec) << "): reconstruction " << sci(rec) << "\n";

    json decs = json::array();
    for (double p : cfg.p_list) {
      const AtomicDecomposition d = calibrate(plan, p);
      write_decomposition(root / label / p_label(p), d, cfg, "../input.bin", false);
      double sup_gf = 0.0;
      bool v_ok = true;
      std::size_t v_failures = 0;
      if (cfg.run_validate) {
        const ValidationResult vr = validate_decomposition(d, validation_config(cfg, p));
        sup_gf = vr.sup_gf_bound;
        v_ok = vr.pass;
        v_failures = vr.failures.size();
        for (const auto& msg : vr.failures) log << "  FAIL " << p_label(p) << ": " << msg << "\n";
      } else {
        for (const Atom& a : d.atoms) {
          sup_gf = std::max(sup_gf, check_atom_gf_bound(a.values, bank, p));
        }
      }
      const bool r_ok = d.reassembly_residual <= cfg.tol_reassembly;
      const bool ok = r_ok && v_ok;
      pass = pass && ok;
      const double ratio = d.hp_norm_p > 0.0 ? d.sum_lambda_p / d.hp_norm_p : 0.0;
      decs.push_back({{"p", p},
                      {"atoms", d.atoms.size()},
                      {"sum_lambda_p", d.sum_lambda_p},
                      {"hp_norm_p", d.hp_norm_p},
                      {"norm_ratio", ratio},
                      {"sup_gf_atom", sup_gf},
                      {"reassembly_residual", d.reassembly_residual},
                      {"C", d.C},
                      {"C_l2", d.C_l2},
                      {"C_12", d.C_12},
                      {"validated", cfg.run_validate != 0},
                      {"validation_failures", v_failures},
                      {"pass", ok}});
      csv += label + "," + num(p) + "," + std::to_string(d.atoms.size()) + "," +
             num(d.sum_lambda_p) + "," + num(d.hp_norm_p) + "," + num(ratio) + "," + num(sup_gf) +
             "," + num(d.reassembly_residual) + "," + num(d.C) + "," + num(d.C_l2) + "," +
             num(d.C_12) + "," + std::to_string(cfg.run_validate) + "," + (ok ? "1" : "0") + "\n";
      log << "  " << decomposition_line(d) << ", sup ||g_F(a)||_p " << sci(sup_gf)
          << (ok ? "" : "  FAIL") << "\n";
    }
    e["decompositions"] = decs;
    entries.push_back(e);
  }
  rep["entries"] = entries;
  rep["pass"] = pass;
  write_json(fs::path(cfg.out) / "corpus-report.json", rep);
  io::write_text(fs::path(cfg.out) / "corpus-summary.csv", csv);
  log << "corpus-run: " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kExitPass : kExitFailure;
}

}  // namespace flaghp
