#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zorsn/campaign.hpp"
#include "zorsn/problems.hpp"
#include "zorsn/solvers.hpp"

namespace zorsn {

/// Sectioned key = value text. '#' and ';' start comments; keys outside any
/// section are an error. Every entry remembers its line for diagnostics.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(const std::string& text, const std::string& source);
  static IniDocument load(const std::string& path);

  [[nodiscard]] bool has_section(const std::string& section) const;
  [[nodiscard]] const Entry* find(const std::string& section, const std::string& key) const;
  /// Throws ConfigError naming the field when missing.
  [[nodiscard]] const Entry& require(const std::string& section, const std::string& key) const;
  [[nodiscard]] const std::string& source() const { return source_; }

  /// Keys present in a section, for unknown-key detection.
  [[nodiscard]] std::vector<std::string> keys(const std::string& section) const;

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

struct TheorySettings {
  std::vector<std::string> checks;
  int trials = 1000;
  std::vector<double> alphas{1e-1, 1e-2};
  std::vector<int> m_values{1, 2, 4};
  std::optional<int> m;            // rho / descent / identity; falls back to [solver] m
  SketchStrategy sketch = SketchStrategy::Eigenvector;
  int samples = 20000;
  int seeds = 200;
  int iterations = 150;
  double sigma = 0.5;
  double delta = 0.5;
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string source;
  ProblemDescriptor problem;
  bool has_solver = false;
  std::vector<SolverId> solvers;
  SolverConfig solver;
  int repetitions = 1;
  std::vector<std::int64_t> checkpoints{2000, 4000, 6000};
  std::string out_dir = "out";
  int jobs = 1;
  TheorySettings theory;
};

/// Builds an experiment from a parsed document. [solver] gamma, alpha and m
/// are mandatory whenever the section is (need_solver) or is present.
ExperimentConfig parse_experiment(const IniDocument& doc, bool need_solver);

/// Problems of a repeated experiment: instance i gets seed problem.seed + i.
std::vector<ProblemDescriptor> make_suite(const ExperimentConfig& cfg);

struct CliOverrides {
  std::optional<std::uint64_t> seed;  // replaces both the solver and the problem seed
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
};
void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o);

/// %.17g: 17 significant digits, lowercase exponent.
std::string format_double(double v);

/// "k,f,queries,m_used,accepted,step_norm" plus one row per record.
std::string trace_csv(const RunTrace& trace);

/// {solver, problem, outcome, queries, final_f, success, checkpoints: {q: f}}
nlohmann::json summary_json(const RunResult& run, SolverId solver,
                            const std::vector<std::int64_t>& checkpoints);

/// Comparison table: solver, runs, success rate, query statistics and the
/// mean f_est{q} - f* columns.
std::string table_csv(const std::vector<CampaignSummary>& rows);
std::string table_text(const std::vector<CampaignSummary>& rows);

// Subcommands. Return the process exit code; diagnostics go to `err`.
//   solve:         0 Converged, 2 BudgetExhausted, 3 IterCap, 1 config error
//   bench:         0 on success, 1 config error
//   verify-theory: 0 iff every requested check passed, 1 otherwise
//   attack-demo:   0 on success, 1 config error
// Any other failure exits with 4.
int cmd_solve(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err);
int cmd_bench(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err);
int cmd_verify_theory(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err);
int cmd_attack_demo(const std::string& path, const CliOverrides& o, std::ostream& out, std::ostream& err);

}  // namespace zorsn
