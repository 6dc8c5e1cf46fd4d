// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "../support/qp_oracle.hpp"
#include "zorsn/campaign.hpp"
#include "zorsn/estimators.hpp"
#include "zorsn/problems.hpp"
#include "zorsn/qp.hpp"
#include "zorsn/solvers.hpp"
#include "zorsn/theory.hpp"

using namespace zorsn;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> linear_spectrum(int n, double lo, double hi) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = n == 1 ? hi : lo + (hi - lo) * i / (n - 1);
  return s;
}

// 1. ||g~ - S^T g|| <= sqrt(m) a L1 / 2 + 1e-9 on quadratics.
Verdict gradient_bound() {
  const int n = 10;
  const double l1s[] = {1.0, 4.0, 100.0};
  const int ms[] = {1, 4, 10};
  const double alphas[] = {1e-2, 1e-4};
  std::vector<QuadraticProblem> problems;
  for (double l1 : l1s) problems.push_back(make_quadratic(n, linear_spectrum(n, l1 / 10.0, l1), 17));
  Rng rng(1);
  std::normal_distribution<double> normal;
  int violations = 0;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto& q = problems[static_cast<std::size_t>(t % 3)];
    const int m = ms[(t / 3) % 3];
    const double a = alphas[(t / 9) % 2];
    const double l1 = q.constants().L1;
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = normal(rng);
    const Sketch s = draw_sketch(t % 2 ? SketchStrategy::Gaussian : SketchStrategy::Coordinate, n, m, rng);
    CountedOracle oracle(n, [&q](const Vector& y) { return q.value(y); });
    const SketchedModel model = build_model(oracle, x, s, a);
    const double err = (model.g_tilde - s.columns.transpose() * q.gradient(x)).norm();
    const double bound = std::sqrt(double(m)) * a * l1 / 2.0;
    worst = std::max(worst, err / bound);
    if (err > bound + 1e-9) ++violations;
  }
  return {violations == 0, "1000 draws, violations " + std::to_string(violations) + ", max error/bound " + fmt("%.4f", worst)};
}

// 2. Hessian bound on the smooth convex problem; exactness on quadratics.
Verdict hessian_bound() {
  const SmoothConvexProblem p = make_smooth_convex(10, 20, 0.5, 3);
  const FdBoundsReport smooth = verify_fd_bounds(p, 1000, {1e-2, 1e-3}, {1, 2, 4, 8}, 5);
  const QuadraticProblem q = make_quadratic(10, linear_spectrum(10, 0.5, 8.0), 9);
  const FdBoundsReport quad = verify_fd_bounds(q, 1000, {1e-1, 1e-2}, {1, 4, 10}, 6);
  const bool ok = smooth.passed && !smooth.hessian_exact && quad.passed && quad.hessian_exact &&
                  quad.hess_max_error <= 1e-8;
  return {ok, "smooth max error/bound " + fmt("%.4f", smooth.hess_max_ratio) + ", quadratic max error " +
                  fmt("%.2e", quad.hess_max_error) + (smooth.passed ? "" : "; " + smooth.counterexample)};
}

// 3. Descent inequality with gamma = 1 on quadratics, tight to 1e-9.
Verdict descent() {
  double violation = -1.0, gap = 0.0;
  bool ok = true;
  for (int i = 0; i < 5; ++i) {
    const int n = 4 + 3 * i;
    const QuadraticProblem q = make_quadratic(n, linear_spectrum(n, 0.5, 2.0 + 5 * i), 40 + static_cast<std::uint64_t>(i));
    const DescentReport r = descent_lemma_check(q, 1.0, 1 + i % n, 100, 7 + static_cast<std::uint64_t>(i));
    ok = ok && r.passed && r.max_gap <= 1e-9;
    violation = std::max(violation, r.max_violation);
    gap = std::max(gap, r.max_gap);
  }
  return {ok, "500 steps, max violation " + fmt("%.2e", violation) + ", max |gap| " + fmt("%.2e", gap)};
}

// 4. rho = m/n for eigenvector sketches.
Verdict rho() {
  Rng rng(3);
  std::normal_distribution<double> normal;
  Matrix a(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) a(i, j) = normal(rng);
  const Matrix h6 = a * a.transpose() + 0.5 * Matrix::Identity(6, 6);
  double worst = 0.0;
  for (int m = 1; m <= 6; ++m) worst = std::max(worst, std::abs(compute_rho_exact(h6, SketchStrategy::Eigenvector, m) - m / 6.0));

  const QuadraticProblem q50 = make_quadratic(50, linear_spectrum(50, 1.0, 20.0), 8);
  const RhoEstimate mc = compute_rho_mc(q50.hessian_matrix(), SketchStrategy::Eigenvector, 5, 20000, 99);
  const bool ok = worst <= 1e-12 && std::abs(mc.estimate - 0.1) <= 0.005;
  return {ok, "exact max |rho - m/6| " + fmt("%.1e", worst) + ", Monte Carlo " + fmt("%.6f", mc.estimate)};
}

// 5. Linear rate on the identity quadratic.
Verdict rate() {
  const QuadraticProblem q = make_quadratic(50, std::vector<double>(50, 1.0), 5);
  SolverConfig cfg;
  cfg.m = 5;
  cfg.m_max = 5;
  cfg.gamma = 1.0;
  cfg.alpha = 1e-6;
  cfg.sketch_strategy = SketchStrategy::Eigenvector;
  cfg.seed = 1000;
  const std::vector<double> mean = mean_suboptimality(q, cfg, 200, 150);
  const double factor = fit_decay_factor(mean, std::max(mean.front() * 1e-6, 1e-9));
  return {factor >= 0.88 && factor <= 0.92, "fitted decay factor " + fmt("%.5f", factor) + " (target 0.9)"};
}

// 6. Exact query accounting.
Verdict queries() {
  bool ok = true;
  std::string first_bad;
  const SmoothConvexProblem p = make_smooth_convex(12, 24, 0.5, 2);
  for (int m = 1; m <= 10; ++m) {
    CountedOracle oracle(12, [&p](const Vector& x) { return p.value(x); });
    SolverConfig cfg;
    cfg.m = m;
    cfg.m_max = m;
    cfg.k_max = 6;
    cfg.alpha = 1e-4;
    cfg.seed = static_cast<std::uint64_t>(m);
    const RunTrace t = zo_rsn_solve(oracle, p.start_point(), cfg);
    const std::int64_t per = 1 + m + static_cast<std::int64_t>(m) * (m + 1) / 2;
    std::int64_t prev = 0;
    for (std::size_t i = 0; i + 1 < t.records.size(); ++i) {
      if (t.records[i].queries_cumulative - prev != per) {
        ok = false;
        if (first_bad.empty()) first_bad = " (iteration cost mismatch at m=" + std::to_string(m) + ")";
      }
      prev = t.records[i].queries_cumulative;
    }
    if (t.records.size() != 7) ok = false;
  }
  Rng rng(4);
  for (int m = 1; m < 12; ++m) {
    CountedOracle oracle(12, [&p](const Vector& x) { return p.value(x); });
    const Sketch s = draw_sketch(m % 2 ? SketchStrategy::Coordinate : SketchStrategy::Gaussian, 12, m, rng);
    const SketchedModel model = build_model(oracle, p.start_point(), s, 1e-3);
    const std::int64_t before = oracle.queries();
    (void)extend_model(oracle, p.start_point(), model, grow_sketch(s, rng));
    if (oracle.queries() - before != m + 2) {
      ok = false;
      if (first_bad.empty()) first_bad = " (extension cost mismatch at m=" + std::to_string(m) + ")";
    }
  }
  return {ok, "m = 1..10 iterations and m = 1..11 extensions" + first_bad};
}

// 7. ZO-RSN-SQP toy-attack campaign.
Verdict attack() {
  std::vector<ProblemDescriptor> suite;
  for (std::uint64_t i = 0; i < 50; ++i) {
    ProblemDescriptor d;
    d.kind = ProblemKind::ToyAttack;
    d.n = 32;
    d.classes = 10;
    d.weights_seed = 2024;
    d.seed = i;
    d.epsilon = 0.3;
    d.omega = 1.0;
    suite.push_back(d);
  }
  SolverConfig cfg;
  cfg.alpha = 0.1;
  cfg.gamma = 1.0;
  cfg.m = 3;
  cfg.m_max = 20;
  cfg.query_budget = 50000;
  cfg.record_iterates = true;
  const int jobs = static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency())));
  const CampaignResult c = run_campaign(suite, cfg, SolverId::ZoRsnSqp, {2000, 4000, 6000}, jobs);
  bool feasible = true, monotone = true;
  double worst_linf = 0.0;
  for (const auto& r : c.runs) {
    const BoxRegion box = std::get<ToyAttackProblem>(build_problem(r.problem)).box();
    for (const Vector& x : r.trace.iterates) {
      const double d = (x - box.center).lpNorm<Eigen::Infinity>();
      worst_linf = std::max(worst_linf, d);
      if (d > box.radius + 1e-9) feasible = false;
    }
    for (std::size_t i = 1; i < r.trace.records.size(); ++i)
      if (r.trace.records[i].f_value > r.trace.records[i - 1].f_value) monotone = false;
  }
  const bool ok = c.summary.success_rate == 100.0 && feasible && monotone;
  return {ok, "success " + fmt("%.0f%%", c.summary.success_rate) + ", median queries " +
                  fmt("%.0f", c.summary.median_queries) + ", max linf " + fmt("%.4f", worst_linf) +
                  (monotone ? ", monotone" : ", NOT monotone")};
}

// 8. Box QP against the brute-force lattice.
Verdict box_qp() {
  std::mt19937_64 rng(8);
  int bad_obj = 0, bad_kkt = 0;
  double worst_kkt = 0.0;
  for (int t = 0; t < 500; ++t) {
    const BoxQP p = testing::random_box_qp(1 + t % 3, rng);
    const Vector l = solve_box_qp(p);
    const double kkt = box_qp_kkt_residual(p, l);
    worst_kkt = std::max(worst_kkt, kkt);
    if (kkt > 1e-8) ++bad_kkt;
    if (p.objective(l) > testing::grid_search_min(p, 400) + 1e-6) ++bad_obj;
  }
  return {bad_obj == 0 && bad_kkt == 0, "500 instances, objective failures " + std::to_string(bad_obj) +
                                            ", max KKT residual " + fmt("%.1e", worst_kkt)};
}

// 9. Speedup closed forms.
Verdict speedups() {
  double worst = 0.0;
  for (int n : {2, 10, 100, 1000}) {
    for (double ratio : {0.0, 0.5, 1.0, 7.0}) {
      for (int m : {1, 4, 20}) {
        TheoryInputs t;
        t.n = n;
        t.m = m;
        t.mu = 2.0;
        t.lambda_s1 = ratio * t.mu;
        const SpeedupFactors s = speedup_factors(t);
        const double it = 32.0 * (1.0 + 2.0 / n) * (1.0 + 10.0 * ratio);
        const double qu = 128.0 * (1.0 + 2.0 / n) * (1.0 + 10.0 * ratio) / (m + 1);
        worst = std::max({worst, std::abs(s.iteration - it) / it, std::abs(s.query - qu) / qu});
      }
    }
  }
  TheoryInputs t;
  t.n = 100;
  t.m = 4;
  t.mu = 1.0;
  t.lambda_s1 = 1.0;
  const double v = speedup_factors(t).iteration;
  const bool ok = worst <= 1e-12 && std::abs(v - 359.04) <= 1e-12 * 359.04 && v > 100.0;
  return {ok, "max relative deviation " + fmt("%.1e", worst) + ", n=100 lambda=mu gives " + fmt("%.10g", v)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// 10. Two bench invocations produce byte-identical outputs.
Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "zorsn_acceptance_bench";
  fs::remove_all(root);
  const std::string cfg = std::string(ZORSN_CONFIG_DIR) + "/bench_small.ini";
  auto run = [&](const std::string& tag, int jobs) {
    const std::string cmd = std::string(ZORSN_CLI) + " bench " + cfg + " --jobs " + std::to_string(jobs) +
                            " --out-dir " + (root / tag).string() + " > " + (root.string() + "_" + tag + ".log") + " 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  const int a = run("a", 1);
  const int b = run("b", 4);
  bool same = a == 0 && b == 0;
  std::size_t compared = 0;
  for (const char* f : {"bench.csv", "bench.json", "bench.txt"}) {
    same = same && fs::exists(root / "a" / f) && slurp(root / "a" / f) == slurp(root / "b" / f);
    ++compared;
  }
  for (const auto& e : fs::directory_iterator(root / "a" / "traces")) {
    same = same && slurp(e.path()) == slurp(root / "b" / "traces" / e.path().filename());
    ++compared;
  }
  return {same, std::to_string(compared) + " files compared (jobs 1 vs 4)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"finite-difference gradient bound", gradient_bound},
      {"finite-difference Hessian bound", hessian_bound},
      {"exact subspace Newton descent", descent},
      {"rho for eigenvector sketches", rho},
      {"linear rate on the identity quadratic", rate},
      {"query accounting", queries},
      {"toy-attack campaign", attack},
      {"box QP vs brute force", box_qp},
      {"speedup factors", speedups},
      {"bench determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-40s %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", index, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.passed) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
