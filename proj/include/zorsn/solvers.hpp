#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zorsn/estimators.hpp"
#include "zorsn/oracle.hpp"
#include "zorsn/problems.hpp"
#include "zorsn/sketch.hpp"
#include "zorsn/types.hpp"

namespace zorsn {

/// All tunables of one run.
struct SolverConfig {
  double gamma = 1.0;            // step size
  double alpha = 0.1;            // finite-difference step
  int m = 3;                     // initial sketch size
  int m_max = 20;                // sketch growth cap, effectively min(m_max, n)
  int k_max = 100000;            // iteration cap
  std::int64_t query_budget = 50000;
  double lambda_min = 1e-2;      // eigenvalue projection interval
  double lambda_max = 1e3;
  std::uint64_t seed = 0;
  SketchStrategy sketch_strategy = SketchStrategy::Coordinate;
  // Stop once f <= f_target + tolerance (attacks: f_target = -omega, tolerance 0).
  std::optional<double> f_target;
  double tolerance = 1e-8;
  // Gaussian-direction baseline.
  int zoha_directions = 10;      // b
  double zoha_lambda = 0.01;     // regularizer lambda
  // Keep every iterate in the trace (for feasibility audits).
  bool record_iterates = false;

  /// Throws ConfigError naming the offending field.
  void validate(int n) const;
};

enum class Outcome { Converged, BudgetExhausted, IterCap };
std::string to_string(Outcome o);

/// One iteration: f_value is f at the iteration's base point x_k,
/// queries_cumulative is the oracle counter after the iteration, step_norm is
/// ||x_{k+1} - x_k|| (0 when rejected). Every trace ends with a terminal record
/// at the final iterate (m_used = 0 unless a model was built there).
struct IterationRecord {
  int k = 0;
  double f_value = 0.0;
  std::int64_t queries_cumulative = 0;
  int m_used = 0;
  bool accepted = false;
  double step_norm = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  Outcome outcome = Outcome::IterCap;
  Vector final_x;
  double final_f = 0.0;
  std::int64_t total_queries = 0;
  std::vector<Vector> iterates;  // x_0, x_1, ... when record_iterates is set
};

enum class SolverId { Rsn, ZoRsn, ZoRsnSqp, ZohaGaussDc };
std::string to_string(SolverId id);
/// "rsn" | "zo-rsn" | "zo-rsn-sqp" | "zoha-gauss-dc"
SolverId solver_id_from_string(const std::string& s);

/// Exact subspace Newton step x + gamma S lambda with
/// (S^T H S) lambda = -S^T g (pseudo-inverse when singular).
Vector rsn_step(const SmoothProblem& problem, const Vector& x, const Sketch& s, double gamma);

/// ||g||^2 in the S (S^T H S)^+ S^T metric, i.e. the decrease promised by the
/// descent lemma (times gamma / 2).
double rsn_decrease_norm(const SmoothProblem& problem, const Vector& x, const Sketch& s);

struct ZoRsnStep {
  Vector x_next;
  std::int64_t queries = 0;
  SketchedModel model;
};

/// Zeroth-order subspace Newton step: builds the finite-difference model and
/// solves H~ lambda = -g~. Throws StepRejected when H~ has no eigenvalue above
/// the pseudo-inverse threshold.
ZoRsnStep zo_rsn_step(CountedOracle& oracle, const Vector& x, const Sketch& s, const SolverConfig& cfg);

/// Iterates zo_rsn_step with a fresh sketch per iteration. An iteration is
/// started only if the remaining budget covers it plus one query reserved for
/// evaluating the final iterate. `basis` is required for eigenvector sketches.
RunTrace zo_rsn_solve(CountedOracle& oracle, const Vector& x0, const SolverConfig& cfg,
                      const std::optional<Matrix>& basis = std::nullopt);

/// Exact RSN on a reference problem. The oracle is used only to record f (one
/// query per iteration).
RunTrace rsn_solve(const SmoothProblem& problem, CountedOracle& oracle, const Vector& x0,
                   const SolverConfig& cfg, const std::optional<Matrix>& basis = std::nullopt);

/// Box-constrained subspace SQP with descent checking and sketch growth,
/// started at box.center. Coordinate sketches only. Succeeds (Converged) once
/// an accepted iterate reaches f <= success_threshold.
RunTrace zo_rsn_sqp_solve(CountedOracle& oracle, const BoxRegion& box, double success_threshold,
                          const SolverConfig& cfg);

struct GaussDcModel {
  Matrix h_tilde;  // (2 a^2 b)^{-1} sum |f(x+au) - 2f(x) + f(x-au)| u u^T + lambda I
  Vector g_hat;    // (1/b) sum (f(x+au) - f(x))/a * u
  double f_x = 0.0;
};

/// Gaussian-direction Hessian/gradient estimate at x from the given directions
/// (columns). Costs 1 + 2b queries.
GaussDcModel gauss_dc_model(CountedOracle& oracle, const Vector& x, const Matrix& directions,
                            double alpha, double lambda);

/// Baseline: damped Newton-like step -gamma H~^{-1} g^ with accept-if-nonincreasing,
/// clipped into `box` when given.
RunTrace zoha_gauss_dc_solve(CountedOracle& oracle, const Vector& x0, const SolverConfig& cfg,
                             const std::optional<BoxRegion>& box = std::nullopt);

}  // namespace zorsn
