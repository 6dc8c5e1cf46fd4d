#include "zorsn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "zorsn/theory.hpp"

namespace zorsn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Typed field access with "source:line: [section] key: ..." diagnostics.
class Fields {
 public:
  Fields(const IniDocument& doc, std::string section) : doc_(doc), section_(std::move(section)) {}

  [[noreturn]] void fail(const IniDocument::Entry& e, const std::string& key, const std::string& why) const {
    throw ConfigError(doc_.source() + ":" + std::to_string(e.line) + ": [" + section_ + "] " + key + ": " + why);
  }

  const IniDocument::Entry* get(const std::string& key, bool required) const {
    return required ? &doc_.require(section_, key) : doc_.find(section_, key);
  }

  std::optional<std::string> str(const std::string& key, bool required = false) const {
    const auto* e = get(key, required);
    if (e == nullptr) return std::nullopt;
    return e->value;
  }

  double to_double(const IniDocument::Entry& e, const std::string& key, const std::string& text) const {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
      fail(e, key, "expected a number, got '" + text + "'");
    return v;
  }

  long long to_int(const IniDocument::Entry& e, const std::string& key, const std::string& text) const {
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size()) fail(e, key, "expected an integer, got '" + text + "'");
    return v;
  }

  std::optional<double> number(const std::string& key, bool required = false) const {
    const auto* e = get(key, required);
    if (e == nullptr) return std::nullopt;
    return to_double(*e, key, e->value);
  }

  std::optional<long long> integer(const std::string& key, bool required = false) const {
    const auto* e = get(key, required);
    if (e == nullptr) return std::nullopt;
    return to_int(*e, key, e->value);
  }

  std::optional<std::uint64_t> unsigned_int(const std::string& key, bool required = false) const {
    const auto* e = get(key, required);
    if (e == nullptr) return std::nullopt;
    const long long v = to_int(*e, key, e->value);
    if (v < 0) fail(*e, key, "must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }

  std::optional<bool> boolean(const std::string& key) const {
    const auto* e = get(key, false);
    if (e == nullptr) return std::nullopt;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    fail(*e, key, "expected true/false");
  }

  std::optional<std::vector<double>> numbers(const std::string& key, bool required = false) const {
    const auto* e = get(key, required);
    if (e == nullptr) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split_list(e->value)) out.push_back(to_double(*e, key, item));
    return out;
  }

  std::optional<std::vector<long long>> integers(const std::string& key) const {
    const auto* e = get(key, false);
    if (e == nullptr) return std::nullopt;
    std::vector<long long> out;
    for (const auto& item : split_list(e->value)) out.push_back(to_int(*e, key, item));
    return out;
  }

  void allow_only(const std::set<std::string>& known) const {
    for (const auto& k : doc_.keys(section_))
      if (known.count(k) == 0) fail(*doc_.find(section_, k), k, "unknown field");
  }

  template <class F>
  auto convert(const std::string& key, F&& f) const -> std::optional<decltype(f(std::string()))> {
    const auto* e = get(key, false);
    if (e == nullptr) return std::nullopt;
    try {
      return f(e->value);
    } catch (const Error& ex) {
      fail(*e, key, ex.what());
    }
  }

  const IniDocument& doc() const { return doc_; }

 private:
  const IniDocument& doc_;
  std::string section_;
};

// "a, b, c" or "lo..hi" (n geometrically spaced values).
std::vector<double> parse_spectrum(const Fields& f, int n) {
  const auto* e = f.get("spectrum", true);
  const std::string text = trim(e->value);
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const double lo = f.to_double(*e, "spectrum", trim(text.substr(0, dots)));
    const double hi = f.to_double(*e, "spectrum", trim(text.substr(dots + 2)));
    if (!(lo > 0.0) || hi < lo) f.fail(*e, "spectrum", "range needs 0 < lo <= hi");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    if (n > 1) out.back() = hi;
    return out;
  }
  std::vector<double> out = *f.numbers("spectrum", true);
  if (static_cast<int>(out.size()) != n)
    f.fail(*e, "spectrum", "has " + std::to_string(out.size()) + " values, expected n = " + std::to_string(n));
  return out;
}

ProblemDescriptor parse_problem(const IniDocument& doc) {
  Fields f(doc, "problem");
  f.allow_only({"kind", "n", "seed", "spectrum", "rows", "mu", "weights_seed", "classes", "epsilon", "omega", "label"});
  ProblemDescriptor d;
  (void)doc.require("problem", "kind");
  d.kind = *f.convert("kind", problem_kind_from_string);
  const long long n = *f.integer("n", true);
  if (n < 1) f.fail(*doc.find("problem", "n"), "n", "must be >= 1");
  d.n = static_cast<int>(n);
  d.seed = f.unsigned_int("seed").value_or(0);
  switch (d.kind) {
    case ProblemKind::Quadratic:
      d.spectrum = parse_spectrum(f, d.n);
      break;
    case ProblemKind::SmoothConvex:
      d.rows = static_cast<int>(*f.integer("rows", true));
      d.mu = *f.number("mu", true);
      break;
    case ProblemKind::ToyAttack:
      d.weights_seed = *f.unsigned_int("weights_seed", true);
      d.classes = static_cast<int>(f.integer("classes").value_or(10));
      d.epsilon = *f.number("epsilon", true);
      d.omega = *f.number("omega", true);
      d.label = static_cast<int>(f.integer("label").value_or(-1));
      break;
  }
  return d;
}

SolverConfig parse_solver(const IniDocument& doc, std::vector<SolverId>& ids) {
  Fields f(doc, "solver");
  f.allow_only({"id", "gamma", "alpha", "m", "m_max", "k_max", "query_budget", "lambda_min", "lambda_max",
                "seed", "sketch", "f_target", "tolerance", "zoha_directions", "zoha_lambda", "record_iterates"});
  SolverConfig c;
  if (const auto* e = doc.find("solver", "id")) {
    for (const auto& item : split_list(e->value)) {
      try {
        ids.push_back(solver_id_from_string(item));
      } catch (const ConfigError& ex) {
        f.fail(*e, "id", ex.what());
      }
    }
  }
  c.gamma = *f.number("gamma", true);
  c.alpha = *f.number("alpha", true);
  c.m = static_cast<int>(*f.integer("m", true));
  c.m_max = static_cast<int>(f.integer("m_max").value_or(std::max(c.m, c.m_max)));
  c.k_max = static_cast<int>(f.integer("k_max").value_or(c.k_max));
  c.query_budget = f.integer("query_budget").value_or(c.query_budget);
  c.lambda_min = f.number("lambda_min").value_or(c.lambda_min);
  c.lambda_max = f.number("lambda_max").value_or(c.lambda_max);
  c.seed = f.unsigned_int("seed").value_or(0);
  if (auto s = f.convert("sketch", sketch_strategy_from_string)) c.sketch_strategy = *s;
  if (auto t = f.number("f_target")) c.f_target = *t;
  c.tolerance = f.number("tolerance").value_or(c.tolerance);
  c.zoha_directions = static_cast<int>(f.integer("zoha_directions").value_or(c.zoha_directions));
  c.zoha_lambda = f.number("zoha_lambda").value_or(c.zoha_lambda);
  c.record_iterates = f.boolean("record_iterates").value_or(false);
  return c;
}

TheorySettings parse_theory(const IniDocument& doc) {
  Fields f(doc, "theory");
  f.allow_only({"checks", "trials", "alphas", "m_values", "m", "sketch", "samples", "seeds", "iterations", "sigma",
                "delta", "epsilon", "seed"});
  TheorySettings t;
  if (auto c = f.str("checks")) t.checks = split_list(*c);
  t.trials = static_cast<int>(f.integer("trials").value_or(t.trials));
  if (auto a = f.numbers("alphas")) t.alphas = *a;
  if (auto ms = f.integers("m_values")) {
    t.m_values.clear();
    for (long long v : *ms) t.m_values.push_back(static_cast<int>(v));
  }
  if (auto m = f.integer("m")) t.m = static_cast<int>(*m);
  if (auto s = f.convert("sketch", sketch_strategy_from_string)) t.sketch = *s;
  t.samples = static_cast<int>(f.integer("samples").value_or(t.samples));
  t.seeds = static_cast<int>(f.integer("seeds").value_or(t.seeds));
  t.iterations = static_cast<int>(f.integer("iterations").value_or(t.iterations));
  t.sigma = f.number("sigma").value_or(t.sigma);
  t.delta = f.number("delta").value_or(t.delta);
  t.epsilon = f.number("epsilon").value_or(t.epsilon);
  t.seed = f.unsigned_int("seed").value_or(0);
  return t;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << content;
  if (!os) throw ConfigError("failed writing " + path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json descriptor_json(const ProblemDescriptor& d) {
  json j;
  to_json(j, d);
  return j;
}

json checkpoints_json(const CampaignSummary& s) {
  json j = json::object();
  for (const auto& c : s.checkpoints) j[std::to_string(c.queries)] = c.mean_gap;
  return j;
}

json campaign_json(const CampaignResult& c) {
  json runs = json::array();
  for (const auto& r : c.runs) {
    runs.push_back({{"instance", r.instance},
                    {"seed", r.problem.seed},
                    {"success", r.success},
                    {"outcome", to_string(r.trace.outcome)},
                    {"queries", r.queries},
                    {"final_f", r.final_f},
                    {"f_opt", r.f_opt},
                    {"linf", r.linf}});
  }
  const auto& s = c.summary;
  return {{"solver", s.solver},
          {"runs", s.runs},
          {"success_rate", s.success_rate},
          {"median_queries", s.median_queries},
          {"mean_queries", s.mean_queries},
          {"max_queries", s.max_queries},
          {"checkpoints", checkpoints_json(s)},
          {"instances", runs}};
}

void write_traces(const fs::path& dir, const CampaignResult& c) {
  for (const auto& r : c.runs)
    write_file(dir / "traces" / (c.summary.solver + "_" + std::to_string(r.instance) + ".csv"), trace_csv(r.trace));
}

ExperimentConfig load(const std::string& path, const CliOverrides& o, bool need_solver) {
  ExperimentConfig cfg = parse_experiment(IniDocument::load(path), need_solver);
  apply_overrides(cfg, o);
  return cfg;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
}

// --------------------------------------------------------- theory checks

json check_result(const std::string& name, int trials, double max_ratio, bool passed) {
  return {{"check_name", name}, {"trials", trials}, {"max_ratio", max_ratio}, {"passed", passed}};
}

const SmoothProblem& need_smooth(const AnyProblem& p, const std::string& check) {
  const SmoothProblem* s = as_smooth(p);
  if (s == nullptr) throw ConfigError("check '" + check + "' needs a quadratic or smooth-convex problem");
  return *s;
}

int theory_m(const ExperimentConfig& cfg, const std::string& check) {
  if (cfg.theory.m) return *cfg.theory.m;
  if (cfg.has_solver) return cfg.solver.m;
  throw ConfigError("check '" + check + "' needs [theory] m or [solver] m");
}

Matrix reference_hessian(const AnyProblem& p, const std::string& check) {
  if (const auto* q = std::get_if<QuadraticProblem>(&p)) return q->hessian_matrix();
  const SmoothProblem& s = need_smooth(p, check);
  return s.hessian(s.x_star());
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

json run_fd_bounds(const ExperimentConfig& cfg, const AnyProblem& p) {
  const auto& s = need_smooth(p, "fd_bounds");
  const auto& t = cfg.theory;
  const FdBoundsReport r = verify_fd_bounds(s, t.trials, t.alphas, t.m_values, t.seed);
  json j = check_result("fd_bounds", r.trials, r.max_ratio(), r.passed);
  j["gradient_max_ratio"] = r.grad_max_ratio;
  j["gradient_max_error"] = r.grad_max_error;
  j["hessian"] = r.hessian_exact ? json("exact (L2=0)") : json(r.hess_max_ratio);
  j["hessian_max_error"] = r.hess_max_error;
  if (!r.passed) j["counterexample"] = r.counterexample;
  return j;
}

json run_descent(const ExperimentConfig& cfg, const AnyProblem& p) {
  const auto& s = need_smooth(p, "descent_lemma");
  const StabilityConstants st = stability_constants(s);
  const double gamma = 1.0 / st.L_hat_ub;
  const DescentReport r = descent_lemma_check(s, gamma, theory_m(cfg, "descent_lemma"), cfg.theory.trials, cfg.theory.seed);
  json j = check_result("descent_lemma", r.trials, r.max_ratio, r.passed);
  j["gamma"] = gamma;
  j["max_violation"] = r.max_violation;
  j["max_abs_gap"] = r.max_gap;
  return j;
}

json run_rho(const ExperimentConfig& cfg, const AnyProblem& p) {
  const Matrix h = reference_hessian(p, "rho");
  const int n = static_cast<int>(h.rows());
  const int m = theory_m(cfg, "rho");
  const auto strategy = cfg.theory.sketch;
  const bool exact = strategy != SketchStrategy::Gaussian && binomial(n, m) <= 1e5;
  json j;
  double value = 0.0;
  bool passed = true;
  int trials = 0;
  if (exact) {
    value = compute_rho_exact(h, strategy, m);
    trials = static_cast<int>(binomial(n, m));
    j["method"] = "exact";
  } else {
    const RhoEstimate e = compute_rho_mc(h, strategy, m, cfg.theory.samples, cfg.theory.seed);
    value = e.estimate;
    trials = cfg.theory.samples;
    j["method"] = "monte-carlo";
    j["std_error"] = e.std_error;
  }
  const double expected = static_cast<double>(m) / n;
  double ratio = value / expected;
  if (strategy == SketchStrategy::Eigenvector) {
    passed = exact ? std::abs(value - expected) <= 1e-12 : std::abs(value - expected) <= 0.05 * expected;
    j["expected"] = expected;
  } else {
    passed = value > 0.0 && value <= 1.0 + 1e-12;
  }
  json out = check_result("rho", trials, ratio, passed);
  out["value"] = value;
  out["m"] = m;
  out["n"] = n;
  out["sketch"] = to_string(strategy);
  out.update(j);
  return out;
}

json run_rate(const ExperimentConfig& cfg, const AnyProblem& p) {
  const auto* q = std::get_if<QuadraticProblem>(&p);
  if (q == nullptr) throw ConfigError("check 'rate' needs a quadratic problem");
  if (!cfg.has_solver) throw ConfigError("check 'rate' needs a [solver] section");
  const auto& t = cfg.theory;
  const std::vector<double> mean = mean_suboptimality(*q, cfg.solver, t.seeds, t.iterations);
  // Fit the geometric phase only: stop once the mean has dropped by 1e6 or
  // reaches the finite-difference noise floor.
  const double fitted = fit_decay_factor(mean, std::max(mean.front() * 1e-6, 1e-9));
  const int n = q->dim();
  const int m = cfg.solver.m;
  const double rho = cfg.solver.sketch_strategy == SketchStrategy::Eigenvector
                         ? static_cast<double>(m) / n
                         : compute_rho_mc(q->hessian_matrix(), cfg.solver.sketch_strategy, m, 2000, t.seed).estimate;
  const double envelope = 1.0 - 0.9 * t.sigma * rho * cfg.solver.gamma;
  json j = check_result("rate", t.seeds, fitted / envelope, fitted <= envelope);
  j["fitted_factor"] = fitted;
  j["envelope"] = envelope;
  j["rsn_factor"] = 1.0 - rho * cfg.solver.gamma;
  return j;
}

json run_identity(const ExperimentConfig& cfg, const AnyProblem& p) {
  const auto& s = need_smooth(p, "constants_identity");
  if (!cfg.has_solver) throw ConfigError("check 'constants_identity' needs a [solver] section");
  const ProblemConstants k = s.constants();
  const StabilityConstants st = stability_constants(s);
  TheoryInputs in;
  in.n = s.dim();
  in.m = theory_m(cfg, "constants_identity");
  in.mu = k.mu;
  in.L1 = k.L1;
  in.L2 = k.L2;
  in.mu_hat = st.mu_hat_lb;
  in.L_hat = st.L_hat_ub;
  in.gamma = cfg.solver.gamma;
  in.rho = static_cast<double>(in.m) / in.n;
  in.sigma = cfg.theory.sigma;
  in.delta = cfg.theory.delta;
  in.epsilon = cfg.theory.epsilon;
  const ConstantsIdentity c = constants_identity(in);
  const double scale = std::max(1.0, std::abs(c.target));
  json j = check_result("constants_identity", 1, std::abs(c.residual_stated) / c.target,
                        std::abs(c.residual_consistent) <= 1e-12 * scale);
  j["target"] = c.target;
  j["alpha_stated"] = c.alpha_stated;
  j["residual_stated"] = c.residual_stated;
  j["alpha_consistent"] = c.alpha_consistent;
  j["residual_consistent"] = c.residual_consistent;
  return j;
}

}  // namespace

// ------------------------------------------------------------------ ini

IniDocument IniDocument::parse(const std::string& text, const std::string& source) {
  IniDocument doc;
  doc.source_ = source;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = raw;
    if (const auto c = s.find_first_of("#;"); c != std::string::npos) s.erase(c);
    s = trim(s);
    if (s.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw ConfigError(source + ":" + std::to_string(line) + ": " + why);
    };
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail("empty section name");
      if (doc.sections_.count(section) != 0) fail("duplicate section [" + section + "]");
      doc.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail("empty key");
    auto& sec = doc.sections_[section];
    if (sec.count(key) != 0) fail("duplicate field '" + key + "' in [" + section + "]");
    sec[key] = Entry{trim(s.substr(eq + 1)), line};
  }
  return doc;
}

IniDocument IniDocument::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path);
}

bool IniDocument::has_section(const std::string& section) const { return sections_.count(section) != 0; }

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto e = s->second.find(key);
  return e == s->second.end() ? nullptr : &e->second;
}

const IniDocument::Entry& IniDocument::require(const std::string& section, const std::string& key) const {
  if (const auto* e = find(section, key)) return *e;
  throw ConfigError(source_ + ": missing required field '" + key + "' in section [" + section + "]");
}

std::vector<std::string> IniDocument::keys(const std::string& section) const {
  std::vector<std::string> out;
  if (const auto s = sections_.find(section); s != sections_.end())
    for (const auto& [k, v] : s->second) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------- config

ExperimentConfig parse_experiment(const IniDocument& doc, bool need_solver) {
  ExperimentConfig cfg;
  cfg.source = doc.source();
  if (!doc.has_section("problem")) throw ConfigError(doc.source() + ": missing section [problem]");
  cfg.problem = parse_problem(doc);

  if (need_solver && !doc.has_section("solver")) throw ConfigError(doc.source() + ": missing section [solver]");
  if (doc.has_section("solver")) {
    cfg.has_solver = true;
    cfg.solver = parse_solver(doc, cfg.solvers);
    cfg.solver.validate(cfg.problem.n);
  }

  Fields run(doc, "run");
  run.allow_only({"repetitions", "checkpoints", "out_dir", "jobs"});
  cfg.repetitions = static_cast<int>(run.integer("repetitions").value_or(1));
  if (cfg.repetitions < 1) throw ConfigError(doc.source() + ": [run] repetitions must be >= 1");
  if (auto c = run.integers("checkpoints")) cfg.checkpoints.assign(c->begin(), c->end());
  cfg.out_dir = run.str("out_dir").value_or(cfg.out_dir);
  cfg.jobs = static_cast<int>(run.integer("jobs").value_or(1));

  cfg.theory = parse_theory(doc);
  return cfg;
}

std::vector<ProblemDescriptor> make_suite(const ExperimentConfig& cfg) {
  std::vector<ProblemDescriptor> suite;
  for (int i = 0; i < cfg.repetitions; ++i) {
    ProblemDescriptor d = cfg.problem;
    d.seed = cfg.problem.seed + static_cast<std::uint64_t>(i);
    suite.push_back(d);
  }
  return suite;
}

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o) {
  if (o.seed) {
    cfg.solver.seed = *o.seed;
    cfg.problem.seed = *o.seed;
    cfg.theory.seed = *o.seed;
  }
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.jobs) {
    if (*o.jobs < 1) throw ConfigError("--jobs must be >= 1");
    cfg.jobs = *o.jobs;
  }
}

// --------------------------------------------------------------- output

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "k,f,queries,m_used,accepted,step_norm\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.k) + "," + format_double(r.f_value) + "," + std::to_string(r.queries_cumulative) + "," +
           std::to_string(r.m_used) + "," + (r.accepted ? "1" : "0") + "," + format_double(r.step_norm) + "\n";
  }
  return out;
}

json summary_json(const RunResult& run, SolverId solver, const std::vector<std::int64_t>& checkpoints) {
  json cp = json::object();
  for (std::int64_t q : checkpoints) cp[std::to_string(q)] = checkpoint_value(run.trace, q);
  return {{"solver", to_string(solver)},
          {"problem", descriptor_json(run.problem)},
          {"outcome", to_string(run.trace.outcome)},
          {"queries", run.queries},
          {"final_f", run.final_f},
          {"success", run.success},
          {"checkpoints", cp}};
}

namespace {

std::vector<std::string> table_header(const std::vector<CampaignSummary>& rows) {
  std::vector<std::string> h{"solver", "runs", "success_rate", "median_queries", "mean_queries", "max_queries"};
  if (!rows.empty())
    for (const auto& c : rows.front().checkpoints) h.push_back("f_est" + std::to_string(c.queries));
  return h;
}

std::vector<std::string> table_row(const CampaignSummary& s) {
  std::vector<std::string> r{s.solver,
                             std::to_string(s.runs),
                             format_double(s.success_rate),
                             format_double(s.median_queries),
                             format_double(s.mean_queries),
                             std::to_string(s.max_queries)};
  for (const auto& c : s.checkpoints) r.push_back(format_double(c.mean_gap));
  return r;
}

}  // namespace

std::string table_csv(const std::vector<CampaignSummary>& rows) {
  auto join = [](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    return line + "\n";
  };
  std::string out = join(table_header(rows));
  for (const auto& r : rows) out += join(table_row(r));
  return out;
}

std::string table_text(const std::vector<CampaignSummary>& rows) {
  std::vector<std::vector<std::string>> cells{table_header(rows)};
  for (const auto& r : rows) {
    auto row = table_row(r);
    // Shorter numbers for humans; the CSV keeps full precision.
    for (std::size_t i = 2; i < row.size(); ++i) {
      if (i == 5) continue;
      std::ostringstream os;
      os << std::setprecision(6) << std::stod(row[i]);
      row[i] = os.str();
    }
    cells.push_back(row);
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) os << "  ";
      if (i == 0) os << std::left << std::setw(static_cast<int>(width[i])) << cells[r][i];
      else os << std::right << std::setw(static_cast<int>(width[i])) << cells[r][i];
    }
    os << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << "\n";
    }
  }
  return os.str();
}

// ------------------------------------------------------------ commands

int cmd_solve(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load(path, o, true);
    if (cfg.solvers.size() != 1)
      throw ConfigError(cfg.source + ": [solver] id must name exactly one solver for 'solve'");
    const SolverId id = cfg.solvers.front();
    const RunResult r = run_one(cfg.problem, id, cfg.solver);
    const fs::path dir(cfg.out_dir);
    write_file(dir / "trace.csv", trace_csv(r.trace));
    const json summary = summary_json(r, id, cfg.checkpoints);
    write_file(dir / "summary.json", dump(summary));
    out << dump(summary);
    switch (r.trace.outcome) {
      case Outcome::Converged: return 0;
      case Outcome::BudgetExhausted: return 2;
      case Outcome::IterCap: return 3;
    }
    return 4;
  });
}

int cmd_bench(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load(path, o, true);
    if (cfg.solvers.empty()) throw ConfigError(cfg.source + ": [solver] id must name at least one solver");
    const auto suite = make_suite(cfg);
    const fs::path dir(cfg.out_dir);
    std::vector<CampaignSummary> rows;
    json solvers = json::array();
    for (SolverId id : cfg.solvers) {
      const CampaignResult c = run_campaign(suite, cfg.solver, id, cfg.checkpoints, cfg.jobs);
      write_traces(dir, c);
      rows.push_back(c.summary);
      solvers.push_back(campaign_json(c));
    }
    write_file(dir / "bench.csv", table_csv(rows));
    write_file(dir / "bench.txt", table_text(rows));
    write_file(dir / "bench.json", dump({{"problem", descriptor_json(cfg.problem)},
                                         {"repetitions", cfg.repetitions},
                                         {"solvers", solvers}}));
    out << table_text(rows);
    return 0;
  });
}

int cmd_attack_demo(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load(path, o, true);
    if (cfg.problem.kind != ProblemKind::ToyAttack)
      throw ConfigError(cfg.source + ": attack-demo needs [problem] kind = toy-attack");
    const auto suite = make_suite(cfg);
    const fs::path dir(cfg.out_dir);
    std::vector<CampaignSummary> rows;
    json solvers = json::array();
    std::string perturbations = "instance,solver,linf,success,queries,final_f\n";
    for (SolverId id : {SolverId::ZoRsnSqp, SolverId::ZohaGaussDc}) {
      const CampaignResult c = run_campaign(suite, cfg.solver, id, cfg.checkpoints, cfg.jobs);
      write_traces(dir, c);
      rows.push_back(c.summary);
      solvers.push_back(campaign_json(c));
      for (const auto& r : c.runs) {
        perturbations += std::to_string(r.instance) + "," + c.summary.solver + "," + format_double(r.linf) + "," +
                         (r.success ? "1" : "0") + "," + std::to_string(r.queries) + "," + format_double(r.final_f) +
                         "\n";
      }
    }
    write_file(dir / "attack.csv", table_csv(rows));
    write_file(dir / "attack.txt", table_text(rows));
    write_file(dir / "perturbations.csv", perturbations);
    write_file(dir / "attack.json", dump({{"problem", descriptor_json(cfg.problem)},
                                          {"epsilon", cfg.problem.epsilon},
                                          {"repetitions", cfg.repetitions},
                                          {"solvers", solvers}}));
    out << table_text(rows);
    return 0;
  });
}

int cmd_verify_theory(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load(path, o, false);
    if (cfg.theory.checks.empty()) throw ConfigError(cfg.source + ": [theory] checks lists no checks");
    static const std::set<std::string> known{"fd_bounds", "descent_lemma", "rho", "rate", "constants_identity"};
    for (const auto& c : cfg.theory.checks)
      if (known.count(c) == 0)
        throw ConfigError(cfg.source + ": [theory] checks: unknown check '" + c +
                          "' (known: fd_bounds, descent_lemma, rho, rate, constants_identity)");

    const AnyProblem p = build_problem(cfg.problem);
    json report = json::array();
    bool all = true;
    for (const auto& name : cfg.theory.checks) {
      json r;
      try {
        if (name == "fd_bounds") r = run_fd_bounds(cfg, p);
        else if (name == "descent_lemma") r = run_descent(cfg, p);
        else if (name == "rho") r = run_rho(cfg, p);
        else if (name == "rate") r = run_rate(cfg, p);
        else r = run_identity(cfg, p);
      } catch (const PreconditionError& e) {
        r = check_result(name, 0, 0.0, false);
        r["error"] = e.what();
      }
      all = all && r["passed"].get<bool>();
      report.push_back(r);
    }
    write_file(fs::path(cfg.out_dir) / "theory.json", dump(report));
    out << dump(report);
    return all ? 0 : 1;
  });
}

}  // namespace zorsn
