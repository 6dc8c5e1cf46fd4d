#include "zorsn/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "zorsn/linalg.hpp"
#include "zorsn/qp.hpp"

namespace zorsn {

namespace {

bool reached(const SolverConfig& cfg, double f) {
  return cfg.f_target.has_value() && f <= *cfg.f_target + cfg.tolerance;
}

std::int64_t remaining(const CountedOracle& oracle, const SolverConfig& cfg) {
  return cfg.query_budget - oracle.queries();
}

void finish(RunTrace& trace, const CountedOracle& oracle, int k, const Vector& x, double f,
            int m_used) {
  trace.records.push_back({k, f, oracle.queries(), m_used, false, 0.0});
  trace.final_x = x;
  trace.final_f = f;
  trace.total_queries = oracle.queries();
}

}  // namespace

void SolverConfig::validate(int n) const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid solver config field '" + field + "': " + why);
  };
  if (!(gamma > 0.0)) fail("gamma", "must be > 0");
  if (!(alpha > 0.0)) fail("alpha", "must be > 0");
  if (m < 1) fail("m", "must be >= 1");
  if (m > n) fail("m", "must be <= problem dimension");
  if (m_max < m) fail("m_max", "must be >= m");
  if (k_max < 1) fail("k_max", "must be >= 1");
  if (query_budget <= 0) fail("query_budget", "must be > 0");
  if (!(lambda_min > 0.0)) fail("lambda_min", "must be > 0");
  if (!(lambda_max >= lambda_min)) fail("lambda_max", "must be >= lambda_min");
  if (zoha_directions < 1) fail("zoha_directions", "must be >= 1");
  if (!(zoha_lambda > 0.0)) fail("zoha_lambda", "must be > 0");
  if (!(tolerance >= 0.0)) fail("tolerance", "must be >= 0");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "Converged";
    case Outcome::BudgetExhausted: return "BudgetExhausted";
    case Outcome::IterCap: return "IterCap";
  }
  return "unknown";
}

std::string to_string(SolverId id) {
  switch (id) {
    case SolverId::Rsn: return "rsn";
    case SolverId::ZoRsn: return "zo-rsn";
    case SolverId::ZoRsnSqp: return "zo-rsn-sqp";
    case SolverId::ZohaGaussDc: return "zoha-gauss-dc";
  }
  return "unknown";
}

SolverId solver_id_from_string(const std::string& s) {
  if (s == "rsn") return SolverId::Rsn;
  if (s == "zo-rsn") return SolverId::ZoRsn;
  if (s == "zo-rsn-sqp") return SolverId::ZoRsnSqp;
  if (s == "zoha-gauss-dc") return SolverId::ZohaGaussDc;
  throw ConfigError("unknown solver id '" + s + "'");
}

// ---------------------------------------------------------------- exact RSN

Vector rsn_step(const SmoothProblem& problem, const Vector& x, const Sketch& s, double gamma) {
  if (x.size() != problem.dim() || s.n() != problem.dim())
    throw ContractViolation("rsn_step: dimension mismatch");
  const Matrix& S = s.columns;
  const Matrix shs = S.transpose() * problem.hessian(x) * S;
  const Vector sg = S.transpose() * problem.gradient(x);
  const Vector lambda = solve_spd(0.5 * (shs + shs.transpose()), -sg);
  return x + gamma * (S * lambda);
}

double rsn_decrease_norm(const SmoothProblem& problem, const Vector& x, const Sketch& s) {
  const Matrix& S = s.columns;
  const Matrix shs = S.transpose() * problem.hessian(x) * S;
  const Vector sg = S.transpose() * problem.gradient(x);
  return sg.dot(solve_spd(0.5 * (shs + shs.transpose()), sg));
}

RunTrace rsn_solve(const SmoothProblem& problem, CountedOracle& oracle, const Vector& x0,
                   const SolverConfig& cfg, const std::optional<Matrix>& basis) {
  cfg.validate(problem.dim());
  Rng rng(cfg.seed);
  const SketchSampler sampler(cfg.sketch_strategy, problem.dim(), basis);
  RunTrace trace;
  Vector x = x0;
  if (cfg.record_iterates) trace.iterates.push_back(x);
  int k = 0;
  trace.outcome = Outcome::IterCap;
  for (; k < cfg.k_max; ++k) {
    if (remaining(oracle, cfg) < 2) {
      trace.outcome = Outcome::BudgetExhausted;
      break;
    }
    const double fx = oracle.eval(x);
    if (reached(cfg, fx)) {
      trace.outcome = Outcome::Converged;
      finish(trace, oracle, k, x, fx, 0);
      return trace;
    }
    const Sketch s = sampler.draw(cfg.m, rng);
    const Vector next = rsn_step(problem, x, s, cfg.gamma);
    trace.records.push_back({k, fx, oracle.queries(), cfg.m, true, (next - x).norm()});
    x = next;
    if (cfg.record_iterates) trace.iterates.push_back(x);
  }
  const double f_final = oracle.eval(x);
  if (reached(cfg, f_final)) trace.outcome = Outcome::Converged;
  finish(trace, oracle, k, x, f_final, 0);
  return trace;
}

// ---------------------------------------------------------- zeroth-order RSN

ZoRsnStep zo_rsn_step(CountedOracle& oracle, const Vector& x, const Sketch& s, const SolverConfig& cfg) {
  const std::int64_t before = oracle.queries();
  SketchedModel model = build_model(oracle, x, s, cfg.alpha);
  const Matrix& h = model.h_tilde;
  if (Eigen::LLT<Matrix>(h).info() != Eigen::Success) {
    const SymEig eig = sym_eig(h);
    const double scale = eig.values.cwiseAbs().maxCoeff();
    if (!(eig.values.maxCoeff() > 1e-10 * scale))
      throw StepRejected("zo_rsn_step: sketched Hessian estimate has no positive curvature");
  }
  const Vector lambda = solve_spd(h, -model.g_tilde);
  ZoRsnStep out;
  out.x_next = x + cfg.gamma * (s.columns * lambda);
  out.queries = oracle.queries() - before;
  out.model = std::move(model);
  return out;
}

RunTrace zo_rsn_solve(CountedOracle& oracle, const Vector& x0, const SolverConfig& cfg,
                      const std::optional<Matrix>& basis) {
  cfg.validate(oracle.dim());
  if (x0.size() != oracle.dim()) throw ContractViolation("zo_rsn_solve: x0 has wrong dimension");
  Rng rng(cfg.seed);
  const SketchSampler sampler(cfg.sketch_strategy, oracle.dim(), basis);
  const std::int64_t cost = model_query_count(cfg.m);

  RunTrace trace;
  Vector x = x0;
  if (cfg.record_iterates) trace.iterates.push_back(x);
  trace.outcome = Outcome::IterCap;
  int k = 0;
  for (; k < cfg.k_max; ++k) {
    if (remaining(oracle, cfg) < cost + 1) {
      trace.outcome = Outcome::BudgetExhausted;
      break;
    }
    const Sketch s = sampler.draw(cfg.m, rng);
    ZoRsnStep step = zo_rsn_step(oracle, x, s, cfg);
    const double fx = step.model.f_x;
    if (reached(cfg, fx)) {
      trace.outcome = Outcome::Converged;
      finish(trace, oracle, k, x, fx, cfg.m);
      return trace;
    }
    trace.records.push_back({k, fx, oracle.queries(), cfg.m, true, (step.x_next - x).norm()});
    x = std::move(step.x_next);
    if (cfg.record_iterates) trace.iterates.push_back(x);
  }
  const double f_final = oracle.eval(x);
  if (reached(cfg, f_final)) trace.outcome = Outcome::Converged;
  finish(trace, oracle, k, x, f_final, 0);
  return trace;
}

// -------------------------------------------------------------- ZO-RSN-SQP

RunTrace zo_rsn_sqp_solve(CountedOracle& oracle, const BoxRegion& box, double success_threshold,
                          const SolverConfig& cfg) {
  const int n = oracle.dim();
  cfg.validate(n);
  if (box.center.size() != n) throw ContractViolation("zo_rsn_sqp_solve: box has wrong dimension");
  if (cfg.sketch_strategy != SketchStrategy::Coordinate)
    throw ContractViolation("zo_rsn_sqp_solve: box constraints reduce only for coordinate sketches");

  Rng rng(cfg.seed);
  const SketchSampler sampler(SketchStrategy::Coordinate, n);
  const int m_cap = std::min(cfg.m_max, n);
  RunTrace trace;
  Vector x = box.center;
  if (cfg.record_iterates) trace.iterates.push_back(x);
  double fx = 0.0;
  bool have_fx = false;
  trace.outcome = Outcome::IterCap;

  auto solve_trial = [&](const SketchedModel& model, const Sketch& s) {
    BoxQP qp;
    qp.g = model.g_tilde;
    qp.h = project_eigenvalues(model.h_tilde, cfg.lambda_min, cfg.lambda_max);
    qp.gamma = cfg.gamma;
    const BoxBounds bounds = reduce_constraints(x, box, s, cfg.gamma);
    qp.lower = bounds.lower;
    qp.upper = bounds.upper;
    const Vector lambda = solve_box_qp(qp);
    return box.project(x + cfg.gamma * (s.columns * lambda));
  };

  int k = 0;
  for (; k < cfg.k_max; ++k) {
    if (remaining(oracle, cfg) < model_query_count(cfg.m) + 1) {
      trace.outcome = Outcome::BudgetExhausted;
      break;
    }
    Sketch s = sampler.draw(cfg.m, rng);
    SketchedModel model = build_model(oracle, x, s, cfg.alpha);
    fx = model.f_x;
    have_fx = true;
    if (fx <= success_threshold) {
      trace.outcome = Outcome::Converged;
      finish(trace, oracle, k, x, fx, cfg.m);
      return trace;
    }

    Vector x_trial = solve_trial(model, s);
    double f_trial = oracle.eval(x_trial);
    int m_bar = cfg.m;
    // Grow while the trial does not decrease f ("f_trial >= f_k").
    while (f_trial >= fx && m_bar < m_cap && remaining(oracle, cfg) >= (m_bar + 2) + 1) {
      ++m_bar;
      s = sampler.grow(s, rng);
      model = extend_model(oracle, x, model, s);
      x_trial = solve_trial(model, s);
      f_trial = oracle.eval(x_trial);
    }

    const bool accepted = f_trial <= fx;
    const double step = accepted ? (x_trial - x).norm() : 0.0;
    trace.records.push_back({k, fx, oracle.queries(), m_bar, accepted, step});
    if (accepted) {
      x = std::move(x_trial);
      fx = f_trial;
    }
    if (cfg.record_iterates) trace.iterates.push_back(x);
    if (accepted && fx <= success_threshold) {
      trace.outcome = Outcome::Converged;
      ++k;
      break;
    }
  }
  if (!have_fx) fx = oracle.eval(x);  // budget smaller than one model build
  finish(trace, oracle, k, x, fx, 0);
  return trace;
}

// ------------------------------------------------------------ ZOHA-Gauss-DC

GaussDcModel gauss_dc_model(CountedOracle& oracle, const Vector& x, const Matrix& directions,
                            double alpha, double lambda) {
  const auto n = x.size();
  if (directions.rows() != n || directions.cols() < 1)
    throw ContractViolation("gauss_dc_model: directions must be n x b with b >= 1");
  if (!(alpha > 0.0) || !(lambda > 0.0))
    throw ContractViolation("gauss_dc_model: alpha and lambda must be positive");
  const auto b = directions.cols();
  GaussDcModel out;
  out.f_x = oracle.eval(x);
  out.h_tilde = Matrix::Zero(n, n);
  out.g_hat = Vector::Zero(n);
  for (Eigen::Index i = 0; i < b; ++i) {
    const Vector u = directions.col(i);
    const double f_plus = oracle.eval(x + alpha * u);
    const double f_minus = oracle.eval(x - alpha * u);
    // Delta_{au} f(x) - Delta_{au} f(x - au) = f(x+au) - 2 f(x) + f(x-au)
    const double curvature = std::abs(f_plus - 2.0 * out.f_x + f_minus);
    out.h_tilde += curvature * (u * u.transpose());
    out.g_hat += ((f_plus - out.f_x) / alpha) * u;
  }
  out.h_tilde /= 2.0 * alpha * alpha * static_cast<double>(b);
  out.h_tilde.diagonal().array() += lambda;
  out.g_hat /= static_cast<double>(b);
  return out;
}

RunTrace zoha_gauss_dc_solve(CountedOracle& oracle, const Vector& x0, const SolverConfig& cfg,
                             const std::optional<BoxRegion>& box) {
  const int n = oracle.dim();
  if (cfg.gamma <= 0.0 || cfg.alpha <= 0.0 || cfg.query_budget <= 0 || cfg.k_max < 1 ||
      cfg.zoha_directions < 1 || cfg.zoha_lambda <= 0.0)
    throw ConfigError("zoha_gauss_dc_solve: invalid configuration");
  if (x0.size() != n) throw ContractViolation("zoha_gauss_dc_solve: x0 has wrong dimension");
  if (box && !box->contains(x0, 1e-12)) throw ContractViolation("zoha_gauss_dc_solve: x0 outside the box");

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal;
  const int b = cfg.zoha_directions;
  const std::int64_t cost = 1 + 2 * static_cast<std::int64_t>(b) + 1;

  RunTrace trace;
  Vector x = x0;
  if (cfg.record_iterates) trace.iterates.push_back(x);
  double fx = 0.0;
  bool have_fx = false;
  trace.outcome = Outcome::IterCap;
  int k = 0;
  for (; k < cfg.k_max; ++k) {
    if (remaining(oracle, cfg) < cost) {
      trace.outcome = Outcome::BudgetExhausted;
      break;
    }
    Matrix u(n, b);
    for (int j = 0; j < b; ++j)
      for (int i = 0; i < n; ++i) u(i, j) = normal(rng);
    const GaussDcModel model = gauss_dc_model(oracle, x, u, cfg.alpha, cfg.zoha_lambda);
    fx = model.f_x;
    have_fx = true;
    if (reached(cfg, fx)) {
      trace.outcome = Outcome::Converged;
      finish(trace, oracle, k, x, fx, b);
      return trace;
    }
    Vector x_trial = x - cfg.gamma * solve_spd(model.h_tilde, model.g_hat);
    if (box) x_trial = box->project(x_trial);
    const double f_trial = oracle.eval(x_trial);
    const bool accepted = f_trial <= fx;
    trace.records.push_back({k, fx, oracle.queries(), b, accepted, accepted ? (x_trial - x).norm() : 0.0});
    if (accepted) {
      x = std::move(x_trial);
      fx = f_trial;
    }
    if (cfg.record_iterates) trace.iterates.push_back(x);
    if (accepted && reached(cfg, fx)) {
      trace.outcome = Outcome::Converged;
      ++k;
      break;
    }
  }
  if (!have_fx) fx = oracle.eval(x);
  finish(trace, oracle, k, x, fx, 0);
  return trace;
}

}  // namespace zorsn
