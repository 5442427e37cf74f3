#include "flaghp/config.hpp"

#include <cctype>
#include <cinttypes>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "flaghp/error.hpp"
#include "flaghp/io.hpp"
#include "flaghp/operators.hpp"
#include "json.hpp"

namespace flaghp {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': not a finite number: '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -(1LL << 30) || x > (1LL << 30)) {
    throw ConfigError("config key '" + key + "': integer out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (!v.empty() && v[0] == '-') throw ConfigError("config key '" + key + "': must be non-negative");
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size() && !v.empty() && std::isdigit(static_cast<unsigned char>(v[0]))) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': not an unsigned integer: '" + v + "'");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(v[i]);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define FLAGHP_DOUBLE(name, member)                                              \
  Field {                                                                        \
    name, [](const RunConfig& c) { return fmt_double(c.member); },               \
        [](RunConfig& c, const std::string& v) { c.member = to_double(name, v); } \
  }
#define FLAGHP_INT(name, member)                                             \
  Field {                                                                    \
    name, [](const RunConfig& c) { return std::to_string(c.member); },       \
        [](RunConfig& c, const std::string& v) { c.member = to_int(name, v); } \
  }
#define FLAGHP_U64(name, member)                                             \
  Field {                                                                    \
    name, [](const RunConfig& c) { return std::to_string(c.member); },       \
        [](RunConfig& c, const std::string& v) { c.member = to_u64(name, v); } \
  }
#define FLAGHP_STRING(name, member)                                   \
  Field {                                                             \
    name, [](const RunConfig& c) { return c.member; },                \
        [](RunConfig& c, const std::string& v) { c.member = v; }      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      FLAGHP_INT("grid.n", n),
      FLAGHP_INT("grid.m", m),
      FLAGHP_INT("grid.L", L),
      FLAGHP_DOUBLE("grid.side", side),
      Field{"bank.profile", [](const RunConfig& c) { return std::string(to_string(c.profile)); },
            [](RunConfig& c, const std::string& v) { c.profile = parse_profile(v); }},
      FLAGHP_INT("bank.j_lo", j_lo),
      FLAGHP_INT("bank.j_hi", j_hi),
      FLAGHP_INT("bank.k_lo", k_lo),
      FLAGHP_INT("bank.k_hi", k_hi),
      FLAGHP_INT("bank.moment_order", moment_order),
      Field{"p", [](const RunConfig& c) { return join_doubles(c.p_list); },
            [](RunConfig& c, const std::string& v) { c.p_list = parse_p_list(v); }},
      FLAGHP_U64("seed", seed),
      FLAGHP_STRING("out", out),
      FLAGHP_DOUBLE("threshold.enlargement", enlargement),
      FLAGHP_DOUBLE("threshold.majority", majority),
      FLAGHP_DOUBLE("threshold.dilation", dilation),
      FLAGHP_DOUBLE("threshold.hl_cutoff", hl_cutoff),
      FLAGHP_INT("levels.span", level_span),
      Field{"maximal.family",
            [](const RunConfig& c) { return std::string(to_string(c.maximal_family)); },
            [](RunConfig& c, const std::string& v) {
              c.maximal_family = parse_maximal_family(v);
            }},
      FLAGHP_INT("maximal.max_scale_span", max_scale_span),
      FLAGHP_INT("validate.k_p", k_p),
      FLAGHP_INT("validate.k_max", k_max),
      FLAGHP_INT("validate.samples", samples),
      FLAGHP_U64("validate.lift_budget", lift_budget),
      FLAGHP_DOUBLE("tol.identity", tol_identity),
      FLAGHP_DOUBLE("tol.reconstruction", tol_reconstruction),
      FLAGHP_DOUBLE("tol.reassembly", tol_reassembly),
      FLAGHP_DOUBLE("tol.moment", tol_moment),
      FLAGHP_DOUBLE("tol.marginal", tol_marginal),
      FLAGHP_DOUBLE("tol.dR_sum", tol_dr_sum),
      FLAGHP_DOUBLE("tol.smooth", tol_smooth),
      FLAGHP_DOUBLE("tol.l2", tol_l2),
      FLAGHP_DOUBLE("tol.transfer", tol_transfer),
      FLAGHP_INT("run.validate", run_validate),
      FLAGHP_STRING("operator.kind", operator_kind),
      FLAGHP_STRING("operator.symbol", symbol_path),
  };
  return table;
}

#undef FLAGHP_DOUBLE
#undef FLAGHP_INT
#undef FLAGHP_U64
#undef FLAGHP_STRING

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

// Applies one key; corpus entries are collected separately so that a config
// naming any corpus entry replaces the whole list.
void apply_key(RunConfig& c, std::map<std::size_t, SignalSpec>& corpus, const std::string& key,
               const std::string& value) {
  if (key.rfind("corpus.", 0) == 0) {
    const std::string idx = key.substr(7);
    const long long i = to_integer(key, idx);
    if (i < 0) throw ConfigError("config key '" + key + "': negative corpus index");
    corpus[static_cast<std::size_t>(i)] = parse_signal_spec(value);
    return;
  }
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown config key '" + key + "'");
  f->set(c, value);
}

void install_corpus(RunConfig& c, const std::map<std::size_t, SignalSpec>& corpus) {
  if (corpus.empty()) return;
  std::vector<SignalSpec> list;
  for (const auto& [i, s] : corpus) {
    if (i != list.size()) {
      throw ConfigError("corpus indices must run 0..N-1 without gaps");
    }
    list.push_back(s);
  }
  c.corpus = std::move(list);
}

SignalSpec blr(std::uint64_t seed, double lo, double hi, double lo2, double hi2) {
  SignalSpec s;
  s.kind = SignalKind::band_limited_random;
  s.band_lo = lo;
  s.band_hi = hi;
  s.band2_lo = lo2;
  s.band2_hi = hi2;
  s.seed = seed;
  return s;
}

SignalSpec shaped(SignalKind kind, std::vector<double> center, std::vector<double> widths,
                  std::vector<double> frequency = {}) {
  SignalSpec s;
  s.kind = kind;
  s.center = std::move(center);
  s.widths = std::move(widths);
  s.frequency = std::move(frequency);
  return s;
}

}  // namespace

std::vector<double> parse_p_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("p list has an empty entry: '" + text + "'");
    out.push_back(to_double("p", item));
  }
  if (out.empty()) throw ConfigError("p list is empty");
  return out;
}

std::vector<SignalSpec> default_corpus() {
  using K = SignalKind;
  std::vector<SignalSpec> c;
  c.push_back(blr(7, 4.0, 16.0, 4.0, 16.0));
  c.push_back(blr(11, 4.0, 12.0, 4.0, 12.0));
  c.push_back(blr(13, 6.0, 16.0, 4.0, 10.0));
  c.push_back(blr(17, 4.0, 16.0, 8.0, 16.0));
  c.push_back(shaped(K::gaussian_bump, {0.5, 0.5}, {0.03, 0.03}));
  c.push_back(shaped(K::gaussian_bump, {0.3, 0.7}, {0.05, 0.02}));
  c.push_back(shaped(K::gaussian_bump, {0.25, 0.25}, {0.08, 0.04}));
  c.push_back(shaped(K::tensor_oscillation, {0.5, 0.5}, {0.1, 0.1}, {8.0, 6.0}));
  c.push_back(shaped(K::indicator_smooth, {0.5, 0.5}, {0.2, 0.15}));
  SignalSpec d;
  d.kind = K::delta;
  d.center = {0.5, 0.5};
  c.push_back(d);
  return c;
}

RunConfig default_config() {
  RunConfig c;
  c.corpus = default_corpus();
  return c;
}

std::string format_config(const RunConfig& c) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(c) + "\n";
  for (std::size_t i = 0; i < c.corpus.size(); ++i) {
    out += "corpus." + std::to_string(i) + " = " + format_signal_spec(c.corpus[i]) + "\n";
  }
  return out;
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  RunConfig c = base;
  std::map<std::size_t, SignalSpec> corpus;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_key(c, corpus, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  install_corpus(c, corpus);
  return c;
}

RunConfig parse_config(const std::string& text) { return parse_config(text, default_config()); }

RunConfig apply_json_override(const RunConfig& base, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config JSON does not parse: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  RunConfig c = base;
  std::map<std::size_t, SignalSpec> corpus;
  auto scalar = [](const std::string& key, const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return fmt_double(v.get<double>());
    throw ConfigError("config JSON key '" + key + "': unsupported value type");
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto& v = it.value();
    if (key == "corpus") {
      if (!v.is_array()) throw ConfigError("config JSON 'corpus' must be an array of strings");
      c.corpus.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        corpus[i] = parse_signal_spec(scalar("corpus", v[i]));
      }
      if (v.empty()) throw ConfigError("config JSON 'corpus' is empty");
      continue;
    }
    std::string text;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) text += (i ? "," : "") + scalar(key, v[i]);
    } else {
      text = scalar(key, v);
    }
    apply_key(c, corpus, key, text);
  }
  install_corpus(c, corpus);
  return c;
}

RunConfig load_config(const std::string& path) {
  const std::string text = io::read_text(path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? apply_json_override(default_config(), text) : parse_config(text);
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (c.n < 1 || c.m < 1) fail("grid.n and grid.m must be positive");
  if (c.L < 1 || c.L * (c.n + c.m) > 30) fail("grid.L out of range for this dimension");
  if (!(c.side > 0.0)) fail("grid.side must be positive");
  if (c.j_lo > c.j_hi || c.k_lo > c.k_hi) fail("scale ranges need lo <= hi");
  if (c.moment_order < 0) fail("bank.moment_order must be non-negative");
  if (c.p_list.empty()) fail("p list is empty");
  for (double p : c.p_list) {
    if (!(p > 0.0)) fail("p must be positive, got " + fmt_double(p));
  }
  auto unit = [&](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) fail(std::string(name) + " must lie in (0, 1]");
  };
  unit(c.enlargement, "threshold.enlargement");
  unit(c.majority, "threshold.majority");
  unit(c.hl_cutoff, "threshold.hl_cutoff");
  if (!(c.dilation >= 1.0)) fail("threshold.dilation must be at least 1");
  if (c.level_span < 1) fail("levels.span must be a positive integer");
  if (c.max_scale_span < -1 || c.max_scale_span > c.L) {
    fail("maximal.max_scale_span must be -1 or in [0, L]");
  }
  if (c.k_p < -1) fail("validate.k_p must be -1 (automatic) or non-negative");
  if (c.k_max < 0 || c.k_max > 2) fail("validate.k_max must lie in [0, 2]");
  if (c.samples < 1) fail("validate.samples must be a positive integer");
  if (c.lift_budget < 1) fail("validate.lift_budget must be positive");
  for (double t : {c.tol_identity, c.tol_reconstruction, c.tol_reassembly, c.tol_moment,
                   c.tol_marginal, c.tol_dr_sum, c.tol_smooth, c.tol_l2, c.tol_transfer}) {
    if (!(t >= 0.0)) fail("tolerances must be non-negative");
  }
  if (c.run_validate != 0 && c.run_validate != 1) fail("run.validate must be 0 or 1");
  if (c.out.empty()) fail("out must name a directory");
  const OperatorKind kind = parse_operator_kind(c.operator_kind);
  if (kind == OperatorKind::custom && c.symbol_path.empty()) {
    fail("operator.kind = custom needs operator.symbol");
  }
}

std::string config_hash(const RunConfig& c) {
  RunConfig placed = c;
  placed.out.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : format_config(placed)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

Grid config_grid(const RunConfig& c) { return make_grid(c.n, c.m, c.L, c.side); }
ScaleRange config_j_range(const RunConfig& c) { return {c.j_lo, c.j_hi}; }
ScaleRange config_k_range(const RunConfig& c) { return {c.k_lo, c.k_hi}; }

AtomizerConfig atomizer_config(const RunConfig& c) {
  AtomizerConfig a;
  a.enlargement_threshold = c.enlargement;
  a.majority = c.majority;
  a.dilation = c.dilation;
  a.level_span = c.level_span;
  a.maximal.family = c.maximal_family;
  a.maximal.max_scale_span = c.max_scale_span;
  return a;
}

int effective_k_p(const RunConfig& c, double p) {
  if (c.k_p >= 0) return c.k_p;
  return static_cast<int>(std::floor(2.0 / p - 0.5));
}

ValidationConfig validation_config(const RunConfig& c, double p) {
  ValidationConfig v;
  v.moment_order = c.moment_order;
  v.k_max = std::min(c.k_max, effective_k_p(c, p));
  v.dilation = c.dilation;
  v.sample_rectangles = static_cast<std::size_t>(c.samples);
  v.lift_budget = static_cast<std::size_t>(c.lift_budget);
  v.tol_moment = c.tol_moment;
  v.tol_marginal = c.tol_marginal;
  v.tol_dr_sum = c.tol_dr_sum;
  v.tol_smooth = c.tol_smooth;
  v.tol_l2 = c.tol_l2;
  return v;
}

SignalSpec corpus_entry(const RunConfig& c, std::size_t index) {
  if (index >= c.corpus.size()) {
    throw ConfigError("corpus index " + std::to_string(index) + " out of range (corpus has " +
                      std::to_string(c.corpus.size()) + " entries)");
  }
  SignalSpec s = c.corpus[index];
  if (s.kind == SignalKind::band_limited_random) s.seed += c.seed;
  return s;
}

}  // namespace flaghp
