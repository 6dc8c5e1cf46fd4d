#include "zorsn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "zorsn/estimators.hpp"
#include "zorsn/linalg.hpp"

namespace zorsn {

namespace {

constexpr double kZeroEigenvalue = 1e-10;  // relative to lambda_max
constexpr std::int64_t kMaxSubsets = 100000;
constexpr int kJackknifeGroups = 20;

double log_term(const TheoryInputs& t) {
  return std::log(t.f0_gap / ((1.0 - t.delta) * t.epsilon));
}

std::int64_t ceil_nonneg(double v) {
  if (!(v > 0.0)) return 0;
  return static_cast<std::int64_t>(std::ceil(v));
}

double smallest_nonzero_eigenvalue(const Matrix& a) {
  const SymEig eig = sym_eig(0.5 * (a + a.transpose()));
  const double top = eig.values.maxCoeff();
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values[i] > kZeroEigenvalue * top) return eig.values[i];
  return 0.0;
}

Matrix spd_sqrt(const Matrix& h) {
  if (asymmetry(h) > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw ContractViolation("rho: H must be symmetric");
  const SymEig eig = sym_eig(0.5 * (h + h.transpose()));
  if (!(eig.values[0] > 0.0)) throw ContractViolation("rho: H must be positive definite");
  return eig.vectors * eig.values.cwiseSqrt().asDiagonal() * eig.vectors.transpose();
}

Matrix basis_for(const Matrix& h, SketchStrategy strategy) {
  if (strategy == SketchStrategy::Coordinate) return Matrix::Identity(h.rows(), h.cols());
  if (strategy == SketchStrategy::Eigenvector) return sym_eig(0.5 * (h + h.transpose())).vectors;
  throw ContractViolation("rho: subsets are only defined for coordinate and eigenvector sketches");
}

Matrix columns_of(const Matrix& basis, const std::vector<int>& idx) {
  Matrix s(basis.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) s.col(static_cast<Eigen::Index>(j)) = basis.col(idx[j]);
  return s;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_rho_args(const Matrix& h, int m) {
  if (h.rows() != h.cols() || h.rows() < 1) throw ContractViolation("rho: H must be square");
  if (m < 1 || m > h.rows()) throw InvalidSketch("rho: need 1 <= m <= n");
}

}  // namespace

void TheoryInputs::validate() const {
  auto fail = [](const std::string& what) { throw PreconditionError("theory inputs: " + what); };
  if (n < 1 || m < 1 || m > n) fail("need 1 <= m <= n");
  if (!(mu > 0.0)) fail("mu must be > 0");
  if (L1 < mu) fail("L1 must be >= mu");
  if (L2 < 0.0) fail("L2 must be >= 0");
  if (!(mu_hat > 0.0) || mu_hat > L_hat) fail("need 0 < mu_hat <= L_hat");
  if (!(gamma > 0.0)) fail("gamma must be > 0");
  if (alpha < 0.0) fail("alpha must be >= 0");
  if (!(rho > 0.0 && rho <= 1.0)) fail("rho must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma < 1.0)) fail("sigma must lie in (0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (!(f0_gap > 0.0)) fail("f0_gap must be > 0");
}

Theorem1Constants theorem1_constants(const TheoryInputs& t) {
  if (!(t.mu > 0.0)) throw PreconditionError("theorem1_constants: mu must be > 0");
  const double sm = std::sqrt(static_cast<double>(t.m));
  const double mu2 = t.mu * t.mu;
  Theorem1Constants c;
  c.B = 10.0 * t.m * t.L2 / (3.0 * t.mu);
  c.C1 = t.gamma * (sm * t.L1 + c.B) / (2.0 * t.mu);
  c.C2 = t.gamma * t.L1 * t.L1 * (t.m + sm * (1.0 + c.B)) / (2.0 * mu2);
  c.C3 = t.gamma * t.L1 * (sm * t.L1 * (1.0 + c.B) + c.B * (2.0 + c.B)) / (2.0 * mu2);
  return c;
}

IterationBound iteration_bound(const TheoryInputs& t) {
  t.validate();
  const Theorem1Constants c = theorem1_constants(t);
  const double a = t.alpha;
  const double rate = t.rho * t.mu_hat * t.gamma;
  const double loss = a * c.C1 + a * a * c.C3;
  // With mu_hat <= 1 the contraction condition already implies the L2 cap;
  // the cap is checked first because it names the more specific cause.
  if (t.L2 > 0.0 && a > 0.3 * t.mu / (t.m * t.L2))
    throw PreconditionError("iteration_bound: alpha <= 0.3*mu/(m*L2) violated");
  if (!(loss < rate))
    throw PreconditionError("iteration_bound: alpha*C1 + alpha^2*C3 < rho*mu_hat*gamma violated");
  if (a * (c.C1 + c.C2 * a) / (rate - loss) > t.delta * t.epsilon)
    throw PreconditionError(
        "iteration_bound: alpha*(C1 + C2*alpha)/(rho*mu_hat*gamma - alpha*C1 - alpha^2*C3) <= "
        "delta*epsilon violated");

  IterationBound out;
  out.contraction = 1.0 - rate + loss;
  out.beta1 = 1.0 / (rate - loss);
  const double lt = log_term(t);
  // log1p keeps the tiny-rate regime accurate: log(1/q) = -log1p(q - 1).
  out.exact = ceil_nonneg(lt / -std::log1p(loss - rate));
  out.weaker = ceil_nonneg(out.beta1 * lt);
  return out;
}

double corollary_alpha(double c1, double c2, double rho_mu_gamma, double sigma) {
  if (!(c2 > 0.0)) throw PreconditionError("corollary_alpha: degenerate problem (C2 = 0)");
  return (std::sqrt(c1 * c1 / 4.0 + (1.0 - sigma) * rho_mu_gamma) - c1 / 2.0) / c2;
}

double corollary_alpha(const TheoryInputs& t) {
  const Theorem1Constants c = theorem1_constants(t);
  return corollary_alpha(c.C1, c.C2, t.rho * t.mu_hat * t.gamma, t.sigma);
}

double corollary_alpha_consistent(const TheoryInputs& t) {
  const Theorem1Constants c = theorem1_constants(t);
  if (!(c.C3 > 0.0)) throw PreconditionError("corollary_alpha_consistent: degenerate problem (C3 = 0)");
  const double rhs = (1.0 - t.sigma) * t.rho * t.mu_hat * t.gamma;
  // 2 rhs / (C1 + sqrt(C1^2 + 4 C3 rhs)) avoids cancellation for small rhs.
  return 2.0 * rhs / (c.C1 + std::sqrt(c.C1 * c.C1 + 4.0 * c.C3 * rhs));
}

ConstantsIdentity constants_identity(const TheoryInputs& t) {
  const Theorem1Constants c = theorem1_constants(t);
  const double rate = t.rho * t.mu_hat * t.gamma;
  auto lhs = [&](double a) { return rate - a * c.C1 - a * a * c.C3; };
  ConstantsIdentity out;
  out.target = t.sigma * rate;
  out.alpha_stated = corollary_alpha(t);
  out.residual_stated = lhs(out.alpha_stated) - out.target;
  out.alpha_consistent = corollary_alpha_consistent(t);
  out.residual_consistent = lhs(out.alpha_consistent) - out.target;
  return out;
}

double zoha_pw_beta2(const TheoryInputs& t) {
  if (t.m < 1) throw PreconditionError("zoha_pw_bound: m must be >= 1");
  if (!(t.mu > 0.0)) throw PreconditionError("zoha_pw_bound: mu must be > 0");
  return 64.0 * (t.n + 2.0) * (t.mu + 10.0 * t.lambda_s1) / (t.mu * t.m);
}

std::int64_t zoha_pw_bound(const TheoryInputs& t) {
  return ceil_nonneg(zoha_pw_beta2(t) * log_term(t));
}

SpeedupFactors speedup_factors(const TheoryInputs& t) {
  if (!(t.mu > 0.0) || t.n < 1) throw PreconditionError("speedup_factors: need mu > 0 and n >= 1");
  const double spectral = 1.0 + 10.0 * t.lambda_s1 / t.mu;
  const double dim = 1.0 + 2.0 / t.n;
  SpeedupFactors s;
  s.iteration = 32.0 * dim * spectral;
  s.query = 128.0 * dim * spectral / (t.m + 1.0);
  s.query_advantage = t.m < 128.0 * spectral - 1.0;
  return s;
}

// -------------------------------------------------------------------- rho

Matrix subspace_projector(const Matrix& h_sqrt, const Matrix& h, const Matrix& s) {
  const Matrix shs = s.transpose() * h * s;
  const SymEig eig = sym_eig(0.5 * (shs + shs.transpose()));
  const double top = eig.values.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(eig.values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    if (eig.values[i] > kZeroEigenvalue * top) inv[i] = 1.0 / eig.values[i];
  const Matrix x = h_sqrt * s * eig.vectors;
  return x * inv.asDiagonal() * x.transpose();
}

double compute_rho_exact(const Matrix& h, SketchStrategy strategy, int m) {
  check_rho_args(h, m);
  const int n = static_cast<int>(h.rows());
  if (binomial(n, m) > static_cast<double>(kMaxSubsets))
    throw PreconditionError("compute_rho_exact: C(n, m) exceeds 1e5 subsets; use compute_rho_mc");
  const Matrix basis = basis_for(h, strategy);
  if (m == n) return 1.0;  // S is invertible, so P = I
  const Matrix root = spd_sqrt(h);

  Matrix sum = Matrix::Zero(n, n);
  std::int64_t count = 0;
  std::vector<int> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    sum += subspace_projector(root, h, columns_of(basis, idx));
    ++count;
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return smallest_nonzero_eigenvalue(sum / static_cast<double>(count));
}

RhoEstimate compute_rho_mc(const Matrix& h, SketchStrategy strategy, int m, int samples,
                           std::uint64_t seed, RhoSampling sampling) {
  check_rho_args(h, m);
  if (samples < 100) throw PreconditionError("compute_rho_mc: need at least 100 samples");
  const int n = static_cast<int>(h.rows());
  const Matrix root = spd_sqrt(h);
  if (m == n) return {1.0, 0.0};

  Rng rng(seed);
  const bool gaussian = strategy == SketchStrategy::Gaussian;
  const Matrix basis = gaussian ? Matrix() : basis_for(h, strategy);

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  int cursor = n;  // forces a shuffle on first use
  auto next_subset = [&]() {
    std::vector<int> idx(static_cast<std::size_t>(m));
    if (sampling == RhoSampling::Independent) {
      for (int j = 0; j < m; ++j) {
        std::uniform_int_distribution<int> pick(j, n - 1);
        std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pick(rng))]);
      }
      std::copy_n(perm.begin(), m, idx.begin());
      return idx;
    }
    if (cursor + m > n) {
      std::shuffle(perm.begin(), perm.end(), rng);
      cursor = 0;
    }
    std::copy_n(perm.begin() + cursor, m, idx.begin());
    cursor += m;
    return idx;
  };

  const int groups = kJackknifeGroups;
  std::vector<Matrix> group_sum(static_cast<std::size_t>(groups), Matrix::Zero(n, n));
  std::vector<int> group_count(static_cast<std::size_t>(groups), 0);
  for (int s = 0; s < samples; ++s) {
    const Matrix cols = gaussian ? draw_sketch(SketchStrategy::Gaussian, n, m, rng).columns
                                 : columns_of(basis, next_subset());
    // Contiguous groups: sample s goes to group floor(s * G / samples).
    const auto g = static_cast<std::size_t>(static_cast<std::int64_t>(s) * groups / samples);
    group_sum[g] += subspace_projector(root, h, cols);
    ++group_count[g];
  }

  Matrix total = Matrix::Zero(n, n);
  for (const auto& gs : group_sum) total += gs;
  RhoEstimate out;
  out.estimate = smallest_nonzero_eigenvalue(total / static_cast<double>(samples));

  std::vector<double> loo(static_cast<std::size_t>(groups));
  for (std::size_t g = 0; g < loo.size(); ++g)
    loo[g] = smallest_nonzero_eigenvalue((total - group_sum[g]) / static_cast<double>(samples - group_count[g]));
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / groups;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  out.std_error = std::sqrt((groups - 1.0) / groups * ss);
  return out;
}

// ------------------------------------------------------------- fd bounds

double FdBoundsReport::max_ratio() const {
  return hessian_exact ? grad_max_ratio : std::max(grad_max_ratio, hess_max_ratio);
}

FdBoundsReport verify_fd_bounds(const SmoothProblem& problem, int trials,
                                const std::vector<double>& alpha_grid,
                                const std::vector<int>& m_grid, std::uint64_t seed) {
  const int n = problem.dim();
  std::vector<int> ms;
  for (int m : m_grid)
    if (m >= 1 && m <= n) ms.push_back(m);
  if (trials < 1 || alpha_grid.empty() || ms.empty())
    throw PreconditionError("verify_fd_bounds: need trials >= 1, a nonempty alpha grid and some m <= n");
  for (double a : alpha_grid)
    if (!(a > 0.0)) throw PreconditionError("verify_fd_bounds: alpha must be > 0");

  const ProblemConstants k = problem.constants();
  CountedOracle oracle(n, [&problem](const Vector& x) { return problem.value(x); });
  Rng rng(seed);
  std::normal_distribution<double> normal;

  FdBoundsReport rep;
  rep.trials = trials;
  rep.hessian_exact = k.L2 == 0.0;
  for (int t = 0; t < trials; ++t) {
    const int m = ms[static_cast<std::size_t>(t) % ms.size()];
    const double a = alpha_grid[(static_cast<std::size_t>(t) / ms.size()) % alpha_grid.size()];
    const auto strategy = t % 2 == 0 ? SketchStrategy::Coordinate : SketchStrategy::Gaussian;
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = normal(rng);
    const Sketch s = draw_sketch(strategy, n, m, rng);

    const SketchedModel model = build_model(oracle, x, s, a);
    const Vector sg = s.columns.transpose() * problem.gradient(x);
    const Matrix shs = s.columns.transpose() * problem.hessian(x) * s.columns;
    const ModelError err = model_error(model, sg, 0.5 * (shs + shs.transpose()));

    const double g_bound = std::sqrt(static_cast<double>(m)) * a * k.L1 / 2.0;
    const double h_bound = rep.hessian_exact ? 1e-8 : 5.0 / 3.0 * m * a * k.L2;
    rep.grad_max_error = std::max(rep.grad_max_error, err.gradient);
    rep.hess_max_error = std::max(rep.hess_max_error, err.hessian);
    if (g_bound > 0.0) rep.grad_max_ratio = std::max(rep.grad_max_ratio, err.gradient / g_bound);
    if (!rep.hessian_exact) rep.hess_max_ratio = std::max(rep.hess_max_ratio, err.hessian / h_bound);

    const bool g_ok = err.gradient <= g_bound + 1e-9;
    const bool h_ok = rep.hessian_exact ? err.hessian <= h_bound : err.hessian <= h_bound + 1e-9;
    if ((!g_ok || !h_ok) && rep.passed) {
      std::ostringstream os;
      os.precision(17);
      os << "trial " << t << ": m=" << m << " alpha=" << a << " sketch=" << to_string(strategy)
         << " gradient error " << err.gradient << " (bound " << g_bound << ")"
         << " hessian error " << err.hessian << " (bound " << h_bound << ")";
      rep.counterexample = os.str();
      rep.passed = false;
    }
  }
  return rep;
}

DescentReport descent_lemma_check(const SmoothProblem& problem, double gamma, int m, int trials,
                                  std::uint64_t seed) {
  const int n = problem.dim();
  if (m < 1 || m > n || trials < 1 || !(gamma > 0.0))
    throw PreconditionError("descent_lemma_check: need 1 <= m <= n, trials >= 1, gamma > 0");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  DescentReport rep;
  rep.trials = trials;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = normal(rng);
    const Sketch s = draw_sketch(t % 2 == 0 ? SketchStrategy::Coordinate : SketchStrategy::Gaussian, n, m, rng);
    const double fx = problem.value(x);
    const double fx_next = problem.value(rsn_step(problem, x, s, gamma));
    const double predicted = 0.5 * gamma * rsn_decrease_norm(problem, x, s);
    const double violation = fx_next - (fx - predicted);
    rep.max_violation = std::max(rep.max_violation, violation);
    rep.max_gap = std::max(rep.max_gap, std::abs(violation));
    if (fx - fx_next > 0.0) rep.max_ratio = std::max(rep.max_ratio, predicted / (fx - fx_next));
    if (violation > 1e-9) rep.passed = false;
  }
  return rep;
}

StabilityConstants stability_constants(const SmoothProblem& problem) {
  const ProblemConstants k = problem.constants();
  if (!(k.mu > 0.0)) throw PreconditionError("stability_constants: mu must be > 0");
  const double c = k.L1 / k.mu;
  if (dynamic_cast<const QuadraticProblem*>(&problem) != nullptr) return {c, 1.0, 1.0};
  return {c, 1.0 / c, c};
}

double fit_decay_factor(const std::vector<double>& values, double floor) {
  std::size_t len = 0;
  while (len < values.size() && std::isfinite(values[len]) && values[len] > floor) ++len;
  if (len < 2) throw PreconditionError("fit_decay_factor: need at least two points above the floor");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double xi = static_cast<double>(i);
    const double yi = std::log(values[i]);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
  }
  const double nn = static_cast<double>(len);
  return std::exp((nn * sxy - sx * sy) / (nn * sxx - sx * sx));
}

std::vector<double> mean_suboptimality(const QuadraticProblem& problem, const SolverConfig& cfg,
                                       int seeds, int iterations) {
  if (seeds < 1 || iterations < 1) throw PreconditionError("mean_suboptimality: need seeds, iterations >= 1");
  std::vector<double> mean(static_cast<std::size_t>(iterations), 0.0);
  const std::optional<Matrix> basis =
      cfg.sketch_strategy == SketchStrategy::Eigenvector ? std::optional<Matrix>(problem.eigenvectors())
                                                         : std::nullopt;
  for (int s = 0; s < seeds; ++s) {
    SolverConfig run = cfg;
    run.seed = cfg.seed + static_cast<std::uint64_t>(s);
    run.k_max = iterations;
    run.query_budget = static_cast<std::int64_t>(iterations) * model_query_count(cfg.m) + 1;
    run.f_target.reset();
    CountedOracle oracle(problem.dim(), [&problem](const Vector& x) { return problem.value(x); });
    const RunTrace trace = zo_rsn_solve(oracle, problem.start_point(), run, basis);
    for (int k = 0; k < iterations; ++k)
      mean[static_cast<std::size_t>(k)] += trace.records[static_cast<std::size_t>(k)].f_value - problem.f_star();
  }
  for (double& v : mean) v /= seeds;
  return mean;
}

}  // namespace zorsn
