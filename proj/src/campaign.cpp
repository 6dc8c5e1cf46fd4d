#include "zorsn/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <thread>

namespace zorsn {

RunResult run_one(const ProblemDescriptor& problem, SolverId solver, const SolverConfig& cfg) {
  const AnyProblem p = build_problem(problem);
  const SmoothProblem* smooth = as_smooth(p);
  const auto* attack = std::get_if<ToyAttackProblem>(&p);
  CountedOracle oracle = make_oracle(p);

  SolverConfig run = cfg;
  if (!run.f_target) {
    run.f_target = optimal_value(p);
    if (attack != nullptr) run.tolerance = 0.0;
  }

  RunResult r;
  r.problem = problem;
  r.f_opt = optimal_value(p);

  std::optional<Matrix> basis;
  if (cfg.sketch_strategy == SketchStrategy::Eigenvector) {
    const auto* quad = std::get_if<QuadraticProblem>(&p);
    if (quad == nullptr) throw ConfigError("eigenvector sketches need a quadratic problem (known eigenbasis)");
    basis = quad->eigenvectors();
  }

  switch (solver) {
    case SolverId::Rsn:
      if (smooth == nullptr) throw ConfigError("solver 'rsn' needs a problem with analytic derivatives");
      r.trace = rsn_solve(*smooth, oracle, start_point(p), run, basis);
      break;
    case SolverId::ZoRsn:
      r.trace = zo_rsn_solve(oracle, start_point(p), run, basis);
      break;
    case SolverId::ZoRsnSqp:
      if (attack == nullptr) throw ConfigError("solver 'zo-rsn-sqp' needs a toy-attack problem");
      r.trace = zo_rsn_sqp_solve(oracle, attack->box(), *run.f_target + run.tolerance, run);
      break;
    case SolverId::ZohaGaussDc:
      r.trace = zoha_gauss_dc_solve(oracle, start_point(p), run,
                                    attack != nullptr ? std::optional<BoxRegion>(attack->box()) : std::nullopt);
      break;
  }

  r.success = r.trace.outcome == Outcome::Converged;
  r.queries = r.trace.total_queries;
  r.final_f = r.trace.final_f;
  if (attack != nullptr) r.linf = (r.trace.final_x - attack->x_nat()).lpNorm<Eigen::Infinity>();
  return r;
}

double checkpoint_value(const RunTrace& trace, std::int64_t q) {
  if (trace.records.empty()) return trace.final_f;
  // Record k's iterate exists once record k-1 finished; x_0 exists at 0.
  double value = trace.records.front().f_value;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    if (trace.records[k - 1].queries_cumulative > q) break;
    value = trace.records[k].f_value;
  }
  return value;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

CampaignSummary summarize(const std::string& solver, const std::vector<RunResult>& runs,
                          const std::vector<std::int64_t>& checkpoints) {
  CampaignSummary s;
  s.solver = solver;
  s.runs = runs.size();
  if (runs.empty()) return s;
  std::vector<double> queries;
  std::size_t wins = 0;
  for (const auto& r : runs) {
    queries.push_back(static_cast<double>(r.queries));
    s.max_queries = std::max(s.max_queries, r.queries);
    if (r.success) ++wins;
  }
  const double count = static_cast<double>(runs.size());
  s.success_rate = 100.0 * static_cast<double>(wins) / count;
  s.mean_queries = std::accumulate(queries.begin(), queries.end(), 0.0) / count;
  s.median_queries = median(queries);
  for (std::int64_t q : checkpoints) {
    double total = 0.0;
    for (const auto& r : runs) total += checkpoint_value(r.trace, q) - r.f_opt;
    s.checkpoints.push_back({q, total / count});
  }
  return s;
}

CampaignResult run_campaign(const std::vector<ProblemDescriptor>& suite, const SolverConfig& cfg,
                            SolverId solver, const std::vector<std::int64_t>& checkpoints, int jobs) {
  if (suite.empty()) throw ConfigError("run_campaign: empty problem suite");
  CampaignResult out;
  out.runs.resize(suite.size());

  auto work = [&](std::size_t i) {
    SolverConfig run = cfg;
    run.seed = cfg.seed + i;
    out.runs[i] = run_one(suite[i], solver, run);
    out.runs[i].instance = i;
  };

  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(suite.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < suite.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < suite.size(); i = next++) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = suite.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  out.summary = summarize(to_string(solver), out.runs, checkpoints);
  return out;
}

}  // namespace zorsn
