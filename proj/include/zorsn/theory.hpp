#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zorsn/problems.hpp"
#include "zorsn/sketch.hpp"
#include "zorsn/solvers.hpp"
#include "zorsn/types.hpp"

namespace zorsn {

/// Every symbol the convergence analysis talks about, in one place.
struct TheoryInputs {
  int n = 1;
  int m = 1;
  double mu = 1.0;
  double L1 = 1.0;
  double L2 = 0.0;
  double mu_hat = 1.0;   // relative convexity
  double L_hat = 1.0;    // relative smoothness
  double gamma = 1.0;
  double alpha = 0.0;
  double rho = 1.0;
  double delta = 0.5;
  double sigma = 0.5;
  double epsilon = 1e-6;
  double lambda_s1 = 0.0;  // lambda_{s+1}, ZOHA-PW comparison
  double f0_gap = 1.0;     // f(x0) - f*
  double omega = 1.0;

  /// Throws PreconditionError on mu_hat > L_hat, delta/sigma outside (0,1),
  /// rho outside (0,1], or nonpositive mu/gamma/epsilon.
  void validate() const;
};

struct Theorem1Constants {
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double B = 0.0;
};

/// B = 10 m L2 / (3 mu)
/// C1 = gamma (sqrt(m) L1 + B) / (2 mu)
/// C2 = gamma L1^2 [m + sqrt(m)(1 + B)] / (2 mu^2)
/// C3 = gamma L1 [sqrt(m) L1 (1 + B) + B (2 + B)] / (2 mu^2)
Theorem1Constants theorem1_constants(const TheoryInputs& t);

struct IterationBound {
  std::int64_t exact = 0;   // ceil(log(gap/((1-delta) eps)) / log(1/(1 - rho mu_hat gamma + a C1 + a^2 C3)))
  std::int64_t weaker = 0;  // ceil(beta1 * log(gap/((1-delta) eps)))
  double beta1 = 0.0;       // 1 / (rho mu_hat gamma - a C1 - a^2 C3)
  double contraction = 0.0; // 1 - rho mu_hat gamma + a C1 + a^2 C3
};

/// Iteration count guaranteeing E[f - f*] <= eps with probability 1 - delta.
/// Throws PreconditionError naming the violated inequality when alpha is too
/// large: a C1 + a^2 C3 < rho mu_hat gamma, a <= 0.3 mu / (m L2) (L2 > 0), and
/// a (C1 + C2 a) / (rho mu_hat gamma - a C1 - a^2 C3) <= delta eps.
IterationBound iteration_bound(const TheoryInputs& t);

/// The step alpha = (sqrt(C1^2/4 + (1 - sigma) rho mu_hat gamma) - C1/2) / C2
/// in its closed form for eigenvector sketches.
double corollary_alpha(const TheoryInputs& t);
double corollary_alpha(double c1, double c2, double rho_mu_gamma, double sigma);

/// Positive root of C3 a^2 + C1 a = (1 - sigma) rho mu_hat gamma, the choice
/// that makes rho mu_hat gamma - a C1 - a^2 C3 = sigma rho mu_hat gamma hold.
double corollary_alpha_consistent(const TheoryInputs& t);

struct ConstantsIdentity {
  double target = 0.0;               // sigma rho mu_hat gamma
  double alpha_stated = 0.0;
  double residual_stated = 0.0;      // (rho mu_hat gamma - a C1 - a^2 C3) - target
  double alpha_consistent = 0.0;
  double residual_consistent = 0.0;
};
ConstantsIdentity constants_identity(const TheoryInputs& t);

/// beta2 = 64 (n + 2)(mu + 10 lambda_{s+1}) / (mu m)
double zoha_pw_beta2(const TheoryInputs& t);
/// ceil(beta2 log(gap / ((1 - delta) eps)))
std::int64_t zoha_pw_bound(const TheoryInputs& t);

struct SpeedupFactors {
  double iteration = 0.0;  // 32 (1 + 2/n)(1 + 10 lambda_{s+1}/mu)
  double query = 0.0;      // 128 (1 + 2/n)(1 + 10 lambda_{s+1}/mu) / (m + 1)
  bool query_advantage = false;  // m < 128 (1 + 10 lambda_{s+1}/mu) - 1
};
SpeedupFactors speedup_factors(const TheoryInputs& t);

/// How the Monte Carlo rho estimator picks subsets.
enum class RhoSampling {
  Independent,        // i.i.d. uniform m-subsets
  PermutationBlocked  // consecutive m-blocks of random permutations
};

struct RhoEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // delete-a-group jackknife
};

/// Smallest nonzero eigenvalue of E[H^{1/2} S (S^T H S)^+ S^T H^{1/2}] by
/// enumerating every m-subset of the coordinate or eigenvector basis.
/// Eigenvalues below 1e-10 * lambda_max count as zero. Refuses more than 1e5
/// subsets.
double compute_rho_exact(const Matrix& h, SketchStrategy strategy, int m);

/// Sample-mean version for large C(n, m). Gaussian sketches are allowed too.
RhoEstimate compute_rho_mc(const Matrix& h, SketchStrategy strategy, int m, int samples,
                           std::uint64_t seed,
                           RhoSampling sampling = RhoSampling::PermutationBlocked);

/// H^{1/2} S (S^T H S)^+ S^T H^{1/2}
Matrix subspace_projector(const Matrix& h_sqrt, const Matrix& h, const Matrix& s);

struct FdBoundsReport {
  int trials = 0;
  double grad_max_ratio = 0.0;   // max actual / bound
  double grad_max_error = 0.0;
  bool hessian_exact = false;    // L2 = 0: Hessian error checked against 1e-8 absolute
  double hess_max_ratio = 0.0;   // only meaningful when !hessian_exact
  double hess_max_error = 0.0;
  bool passed = true;
  std::string counterexample;    // first violating draw, if any
  [[nodiscard]] double max_ratio() const;
};

/// Random (x, S, alpha) draws: x ~ N(0, I), S alternating coordinate and
/// Gaussian sketches with m cycling through m_grid, alpha through alpha_grid.
/// Checks ||g~ - S^T g|| <= sqrt(m) a L1 / 2 + 1e-9 and
/// ||H~ - S^T H S|| <= (5/3) m a L2 + 1e-9.
FdBoundsReport verify_fd_bounds(const SmoothProblem& problem, int trials,
                                const std::vector<double>& alpha_grid,
                                const std::vector<int>& m_grid, std::uint64_t seed);

struct DescentReport {
  int trials = 0;
  double max_violation = 0.0;  // max of f(x+) - [f(x) - (gamma/2)||g||^2]
  double max_gap = 0.0;        // max |violation| (tightness on quadratics)
  double max_ratio = 0.0;      // max predicted / actual decrease
  bool passed = true;
};

/// Exact RSN steps from x ~ N(0, I) checked against the descent lemma.
DescentReport descent_lemma_check(const SmoothProblem& problem, double gamma, int m, int trials,
                                  std::uint64_t seed);

struct StabilityConstants {
  double c = 1.0;
  double mu_hat_lb = 1.0;
  double L_hat_ub = 1.0;
};
/// c = L1 / mu. Quadratics have mu_hat = L_hat = 1 exactly; otherwise
/// mu_hat >= 1/c and L_hat <= c.
StabilityConstants stability_constants(const SmoothProblem& problem);

/// Least-squares slope of log(values) against the index, over the leading run
/// of entries above `floor`, returned as exp(slope).
double fit_decay_factor(const std::vector<double>& values, double floor);

/// Mean of f(x_k) - f* over `seeds` ZO-RSN runs of exactly `iterations`
/// iterations (seed s uses cfg.seed + s).
std::vector<double> mean_suboptimality(const QuadraticProblem& problem, const SolverConfig& cfg,
                                       int seeds, int iterations);

}  // namespace zorsn
