#include "rtsa/config.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <fstream>
#include <functional>
#include <map>
#include <openssl/evp.h>
#include <set>
#include <sstream>

namespace rtsa {

std::string_view to_string(AlgorithmChoice a) {
  switch (a) {
    case AlgorithmChoice::Chen: return "chen";
    case AlgorithmChoice::RobbinsMonro: return "rm";
    case AlgorithmChoice::BothPaired: return "both_paired";
  }
  return "?";
}

namespace {

struct RawValue {
  std::string text;
  std::size_t line;
  std::size_t col;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::map<std::string, std::string, std::less<>>& aliases() {
  static const std::map<std::string, std::string, std::less<>> m{
      {"problem", "problem.name"}, {"dim", "problem.dim"}, {"seed", "master_seed"}};
  return m;
}

class Reader {
 public:
  Reader(const std::string& source, const std::string& key, const RawValue& raw)
      : source_(source), key_(key), raw_(raw) {}

  [[noreturn]] void fail(std::string_view what) const {
    throw ConfigError(fmt::format("{}:{}:{}: {}: {}", source_, raw_.line, raw_.col, key_, what));
  }

  double real() const { return parse_real(raw_.text); }

  std::uint64_t count() const {
    std::uint64_t v = 0;
    const char* b = raw_.text.data();
    const char* e = b + raw_.text.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) fail(fmt::format("expected a nonnegative integer, got '{}'", raw_.text));
    return v;
  }

  std::vector<double> reals() const {
    std::string body = raw_.text;
    if (!body.empty() && body.front() == '[') {
      if (body.back() != ']') fail("unterminated '['");
      body = body.substr(1, body.size() - 2);
    }
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item)));
    if (out.empty()) fail("expected a comma-separated list of numbers");
    return out;
  }

  std::string word() const { return raw_.text; }

 private:
  double parse_real(const std::string& s) const {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (s.empty() || ec != std::errc() || ptr != e) fail(fmt::format("expected a number, got '{}'", s));
    return v;
  }

  const std::string& source_;
  const std::string& key_;
  const RawValue& raw_;
};

std::vector<double> parse_matrix(const Reader& r) {
  const std::string w = r.word();
  if (w == "identity") return {};  // filled once dim is final
  if (w.rfind("diag:", 0) == 0 || w.rfind("diag ", 0) == 0) {
    RawValue sub{w.substr(5), 0, 0};
    std::string key = "problem.matrix";
    const auto diag = Reader("<diag>", key, sub).reals();
    std::vector<double> m(diag.size() * diag.size(), 0.0);
    for (std::size_t i = 0; i < diag.size(); ++i) m[i * diag.size() + i] = diag[i];
    return m;
  }
  return r.reals();  // shape is checked once problem.dim is known
}

using Setter = std::function<void(ExperimentConfig&, const Reader&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> m{
      {"problem.name",
       [](ExperimentConfig& c, const Reader& r) {
         const auto w = r.word();
         if (w != "linear" && w != "cubic" && w != "convex_potential" && w != "repulsive")
           r.fail("must be one of linear, cubic, convex_potential, repulsive");
         c.problem_name = w;
       }},
      {"problem.dim",
       [](ExperimentConfig& c, const Reader& r) {
         const auto v = r.count();
         if (v < 1) r.fail("must be >= 1");
         c.dim = v;
       }},
      {"problem.x_star", [](ExperimentConfig& c, const Reader& r) { c.x_star = r.reals(); }},
      {"problem.matrix", [](ExperimentConfig& c, const Reader& r) { c.matrix = parse_matrix(r); }},
      {"noise.kind",
       [](ExperimentConfig& c, const Reader& r) {
         const auto w = r.word();
         if (w == "additive") c.noise.kind = NoiseModel::Kind::AdditiveGaussian;
         else if (w == "state_scaled") c.noise.kind = NoiseModel::Kind::StateScaledGaussian;
         else r.fail("must be additive or state_scaled");
       }},
      {"noise.sigma",
       [](ExperimentConfig& c, const Reader& r) {
         c.noise.sigma = r.real();
         if (!(c.noise.sigma >= 0.0) || !std::isfinite(c.noise.sigma)) r.fail("must be finite and >= 0");
       }},
      {"algorithm",
       [](ExperimentConfig& c, const Reader& r) {
         const auto w = r.word();
         if (w == "chen") c.algorithm = AlgorithmChoice::Chen;
         else if (w == "rm") c.algorithm = AlgorithmChoice::RobbinsMonro;
         else if (w == "both_paired") c.algorithm = AlgorithmChoice::BothPaired;
         else r.fail("must be chen, rm or both_paired");
       }},
      {"x0", [](ExperimentConfig& c, const Reader& r) { c.x0 = r.reals(); }},
      {"reset",
       [](ExperimentConfig& c, const Reader& r) {
         const auto w = r.word();
         if (w == "initial") c.reset = ResetPolicy::InitialPoint;
         else if (w == "last_valid") c.reset = ResetPolicy::LastValid;
         else r.fail("must be initial or last_valid");
       }},
      {"gain.a", [](ExperimentConfig& c, const Reader& r) { c.gain_a = r.real(); }},
      {"gain.b", [](ExperimentConfig& c, const Reader& r) { c.gain_b = r.real(); }},
      {"gain.alpha", [](ExperimentConfig& c, const Reader& r) { c.gain_alpha = r.real(); }},
      {"compacts.center", [](ExperimentConfig& c, const Reader& r) { c.compacts_center = r.reals(); }},
      {"compacts.r0", [](ExperimentConfig& c, const Reader& r) { c.compacts_r0 = r.real(); }},
      {"compacts.growth",
       [](ExperimentConfig& c, const Reader& r) {
         const auto w = r.word();
         if (w == "geometric") c.compacts_growth = Growth::Geometric;
         else if (w == "arithmetic") c.compacts_growth = Growth::Arithmetic;
         else r.fail("must be geometric or arithmetic");
       }},
      {"compacts.rho_or_step", [](ExperimentConfig& c, const Reader& r) { c.compacts_factor = r.real(); }},
      {"n_steps", [](ExperimentConfig& c, const Reader& r) { c.n_steps = r.count(); }},
      {"n_trajectories", [](ExperimentConfig& c, const Reader& r) { c.n_trajectories = r.count(); }},
      {"master_seed", [](ExperimentConfig& c, const Reader& r) { c.master_seed = r.count(); }},
      {"record",
       [](ExperimentConfig& c, const Reader& r) {
         const auto w = r.word();
         if (w == "full") c.record.kind = RecordPolicy::Kind::Full;
         else if (w == "thinned") c.record.kind = RecordPolicy::Kind::Thinned;
         else if (w == "final_only") c.record.kind = RecordPolicy::Kind::FinalOnly;
         else r.fail("must be full, thinned or final_only");
       }},
      {"record.every",
       [](ExperimentConfig& c, const Reader& r) {
         c.record.every = r.count();
         if (c.record.every < 1) r.fail("must be >= 1");
       }},
      {"divergence_threshold", [](ExperimentConfig& c, const Reader& r) { c.divergence_threshold = r.real(); }},
      {"output.dir", [](ExperimentConfig& c, const Reader& r) { c.output_dir = r.word(); }},
      {"diagnostics.q", [](ExperimentConfig& c, const Reader& r) { c.monitor_radii = r.reals(); }},
      {"diagnostics.tolerances", [](ExperimentConfig& c, const Reader& r) { c.tolerances = r.reals(); }},
      {"diagnostics.stabilization_fraction",
       [](ExperimentConfig& c, const Reader& r) { c.stabilization_fraction = r.real(); }},
      {"diagnostics.window_fraction", [](ExperimentConfig& c, const Reader& r) { c.window_fraction = r.real(); }},
      {"diagnostics.tail_multiplier", [](ExperimentConfig& c, const Reader& r) { c.tail_multiplier = r.real(); }},
      {"check.radii", [](ExperimentConfig& c, const Reader& r) { c.check_radii = r.reals(); }},
      {"check.points_per_radius",
       [](ExperimentConfig& c, const Reader& r) { c.check_points_per_radius = r.count(); }},
      {"check.h3_samples", [](ExperimentConfig& c, const Reader& r) { c.check_h3_samples = r.count(); }},
      {"check.h3_radius", [](ExperimentConfig& c, const Reader& r) { c.check_h3_radius = r.real(); }},
  };
  return m;
}

[[noreturn]] void invalid(std::string_view key, std::string_view what) {
  throw ConfigError(fmt::format("invalid config: {} {}", key, what));
}

std::string fmt_real(double v) { return fmt::format("{}", v); }  // shortest round-trip form

std::string fmt_vec(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_real(v[i]);
  }
  return s;
}

std::map<std::string, std::string> canonical_entries(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv{
      {"problem.name", c.problem_name},
      {"problem.dim", std::to_string(c.dim)},
      {"problem.x_star", fmt_vec(c.x_star)},
      {"noise.kind", std::string(to_string(c.noise.kind))},
      {"noise.sigma", fmt_real(c.noise.sigma)},
      {"algorithm", std::string(to_string(c.algorithm))},
      {"x0", fmt_vec(c.x0)},
      {"reset", std::string(to_string(c.reset))},
      {"gain.a", fmt_real(c.gain_a)},
      {"gain.b", fmt_real(c.gain_b)},
      {"gain.alpha", fmt_real(c.gain_alpha)},
      {"compacts.center", fmt_vec(c.compacts_center)},
      {"compacts.r0", fmt_real(c.compacts_r0)},
      {"compacts.growth", std::string(to_string(c.compacts_growth))},
      {"compacts.rho_or_step", fmt_real(c.compacts_factor)},
      {"n_steps", std::to_string(c.n_steps)},
      {"n_trajectories", std::to_string(c.n_trajectories)},
      {"master_seed", std::to_string(c.master_seed)},
      {"record", c.record.kind == RecordPolicy::Kind::Full       ? "full"
                 : c.record.kind == RecordPolicy::Kind::Thinned ? "thinned"
                                                              : "final_only"},
      {"record.every", std::to_string(c.record.every)},
      {"divergence_threshold", fmt_real(c.divergence_threshold)},
      {"diagnostics.q", fmt_vec(c.monitor_radii)},
      {"diagnostics.tolerances", fmt_vec(c.tolerances)},
      {"diagnostics.stabilization_fraction", fmt_real(c.stabilization_fraction)},
      {"diagnostics.window_fraction", fmt_real(c.window_fraction)},
      {"diagnostics.tail_multiplier", fmt_real(c.tail_multiplier)},
      {"check.radii", fmt_vec(c.check_radii)},
      {"check.points_per_radius", std::to_string(c.check_points_per_radius)},
      {"check.h3_samples", std::to_string(c.check_h3_samples)},
      {"check.h3_radius", fmt_real(c.check_h3_radius)},
  };
  if (c.problem_name == "linear") kv["problem.matrix"] = fmt_vec(c.matrix);
  return kv;
}

}  // namespace

void finalize_config(ExperimentConfig& c, const std::vector<std::string>& explicit_keys) {
  const std::set<std::string> given(explicit_keys.begin(), explicit_keys.end());
  const std::size_t d = c.dim;

  if (c.x_star.empty()) c.x_star.assign(d, 0.0);
  if (c.x_star.size() != d) invalid("problem.x_star", fmt::format("must have {} entries", d));
  if (c.problem_name == "convex_potential" && norm(c.x_star) != 0.0)
    invalid("problem.x_star", "must be the origin for convex_potential");

  if (c.problem_name == "linear") {
    if (c.matrix.empty()) {
      c.matrix.assign(d * d, 0.0);
      for (std::size_t i = 0; i < d; ++i) c.matrix[i * d + i] = 1.0;
    }
    if (c.matrix.size() != d * d) invalid("problem.matrix", fmt::format("must be {}x{}", d, d));
  } else if (given.count("problem.matrix")) {
    c.warnings.push_back("problem.matrix is ignored for problem " + c.problem_name);
  }

  if (c.x0.empty()) c.x0 = unit_vector(d, 0, 0.5);
  if (c.x0.size() != d) invalid("x0", fmt::format("must have {} entries", d));
  if (!all_finite(c.x0)) invalid("x0", "must be finite");

  if (c.compacts_center.empty()) c.compacts_center.assign(d, 0.0);
  if (c.compacts_center.size() != d) invalid("compacts.center", fmt::format("must have {} entries", d));
  if (!given.count("compacts.r0")) c.compacts_r0 = 2.0 * distance(c.x0, c.compacts_center) + 1.0;

  if (c.n_steps < 1) invalid("n_steps", "must be >= 1");
  if (c.n_trajectories < 1) invalid("n_trajectories", "must be >= 1");

  try {
    (void)c.make_schedule();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("invalid config: {}", e.what()));
  }
  CompactFamily compacts = [&] {
    try {
      return c.make_compacts();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("invalid config: {}", e.what()));
    }
  }();
  if (c.algorithm != AlgorithmChoice::RobbinsMonro && !compacts.contains(0, c.x0))
    invalid("x0", fmt::format("= ({}) lies outside K_0 = B(center, {})", fmt_vec(c.x0),
                              fmt_real(c.compacts_r0)));
  if (c.algorithm == AlgorithmChoice::RobbinsMonro) {
    for (const auto& k : given)
      if (k.rfind("compacts.", 0) == 0) {
        c.warnings.push_back("compacts.* settings are ignored for algorithm = rm");
        break;
      }
  }

  if (!(c.divergence_threshold > 0.0)) invalid("divergence_threshold", "must be positive");

  if (c.record.kind == RecordPolicy::Kind::Thinned && !given.count("record.every"))
    c.record.every = (c.n_steps + 999) / 1000;

  if (c.monitor_radii.empty()) {
    const double q = 2.0 * distance(c.x0, c.x_star) + 1.0;
    c.monitor_radii = {q, 2.0 * q, 4.0 * q};
  }
  for (double q : c.monitor_radii)
    if (!(q > 0.0)) invalid("diagnostics.q", "entries must be positive");
  for (double t : c.tolerances)
    if (!(t > 0.0)) invalid("diagnostics.tolerances", "entries must be positive");
  if (!(c.stabilization_fraction > 0.0 && c.stabilization_fraction <= 1.0))
    invalid("diagnostics.stabilization_fraction", "must be in (0, 1]");
  if (!(c.window_fraction > 0.0 && c.window_fraction <= 1.0))
    invalid("diagnostics.window_fraction", "must be in (0, 1]");
  if (!(c.tail_multiplier > 0.0)) invalid("diagnostics.tail_multiplier", "must be positive");

  if (!given.count("check.h3_radius")) c.check_h3_radius = c.compacts_r0;
  if (!(c.check_h3_radius > 0.0)) invalid("check.h3_radius", "must be positive");
  if (c.check_h3_samples < 1000) invalid("check.h3_samples", "must be >= 1000");
  for (double r : c.check_radii)
    if (!(r > 0.0)) invalid("check.radii", "entries must be positive");

  try {
    (void)c.make_problem();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("invalid config: {}", e.what()));
  }

  c.applied_defaults.clear();
  for (const auto& [key, value] : canonical_entries(c))
    if (!given.count(key)) c.applied_defaults.push_back(key + " = " + value);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, RawValue, std::less<>> raw;
  std::vector<std::string> order;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments: '#' at line start or preceded by whitespace.
    for (std::size_t i = 0; i < line.size(); ++i)
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto sep = line.find_first_of("=:", first);
    if (sep == std::string::npos)
      throw ConfigError(fmt::format("{}:{}:{}: expected 'key = value'", source, lineno, first + 1));
    std::string key = trim(std::string_view(line).substr(first, sep - first));
    for (std::size_t i = 0; i < key.size(); ++i) {
      const char ch = key[i];
      const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
      if (!ok)
        throw ConfigError(fmt::format("{}:{}:{}: invalid character in key '{}'", source, lineno,
                                      first + 1 + i, key));
    }
    if (key.empty()) throw ConfigError(fmt::format("{}:{}:{}: missing key", source, lineno, first + 1));
    if (auto a = aliases().find(key); a != aliases().end()) key = a->second;
    if (!setters().count(key))
      throw ConfigError(fmt::format("{}:{}:{}: unknown key '{}'", source, lineno, first + 1, key));
    if (raw.count(key))
      throw ConfigError(fmt::format("{}:{}:{}: duplicate key '{}'", source, lineno, first + 1, key));
    const auto vstart = line.find_first_not_of(" \t", sep + 1);
    std::string value = vstart == std::string::npos ? "" : trim(std::string_view(line).substr(vstart));
    if (value.empty())
      throw ConfigError(fmt::format("{}:{}:{}: missing value for '{}'", source, lineno, sep + 2, key));
    raw[key] = RawValue{value, lineno, vstart + 1};
    order.push_back(key);
  }

  ExperimentConfig cfg;
  for (const auto& key : order) {
    const auto& rv = raw.at(key);
    setters().at(key)(cfg, Reader(source, key, rv));
  }
  if (raw.count("problem.matrix") && cfg.problem_name == "linear" && !cfg.matrix.empty() &&
      cfg.matrix.size() != cfg.dim * cfg.dim) {
    const auto& rv = raw.at("problem.matrix");
    const std::string key = "problem.matrix";
    Reader(source, key, rv).fail(fmt::format("expected a {}x{} matrix", cfg.dim, cfg.dim));
  }
  finalize_config(cfg, order);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : canonical_entries(*this)) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  const std::string text = canonical_text();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

StochasticProblem ExperimentConfig::make_problem() const {
  if (problem_name == "linear") return make_linear(dim, matrix, x_star, noise);
  if (problem_name == "cubic") return make_cubic(dim, x_star, noise);
  if (problem_name == "convex_potential") return make_convex_potential(dim, noise);
  if (problem_name == "repulsive") return make_repulsive(dim, x_star, noise);
  throw std::invalid_argument("unknown problem '" + problem_name + "'");
}

GainSchedule ExperimentConfig::make_schedule() const {
  return GainSchedule::power_law(gain_a, gain_b, gain_alpha);
}

CompactFamily ExperimentConfig::make_compacts() const {
  return CompactFamily(compacts_center, compacts_r0, compacts_growth, compacts_factor);
}

TrajectoryOptions ExperimentConfig::trajectory_options() const {
  TrajectoryOptions o;
  o.n_steps = n_steps;
  o.x0 = x0;
  o.reset = reset;
  o.record = record;
  o.divergence_threshold = divergence_threshold;
  o.monitor_radii = monitor_radii;
  o.window_fraction = window_fraction;
  o.stabilization_fraction = stabilization_fraction;
  return o;
}

}  // namespace rtsa
