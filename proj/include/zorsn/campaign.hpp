#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zorsn/problems.hpp"
#include "zorsn/solvers.hpp"

namespace zorsn {

struct RunResult {
  std::size_t instance = 0;
  ProblemDescriptor problem;
  RunTrace trace;
  bool success = false;
  std::int64_t queries = 0;
  double final_f = 0.0;
  double f_opt = 0.0;      // f* (smooth problems) or -omega (attacks)
  double linf = 0.0;       // ||final_x - x_nat||_inf for attacks, 0 otherwise
};

struct CheckpointValue {
  std::int64_t queries = 0;
  double mean_gap = 0.0;  // mean over runs of f_est(queries) - f_opt
};

struct CampaignSummary {
  std::string solver;
  std::size_t runs = 0;
  double success_rate = 0.0;  // percent
  double median_queries = 0.0;
  double mean_queries = 0.0;
  std::int64_t max_queries = 0;
  std::vector<CheckpointValue> checkpoints;
};

struct CampaignResult {
  std::vector<RunResult> runs;
  CampaignSummary summary;
};

/// One solver on one problem. The convergence target is filled in from the
/// problem unless cfg already carries one: f* with cfg.tolerance for smooth
/// problems, -omega with zero tolerance for attacks.
RunResult run_one(const ProblemDescriptor& problem, SolverId solver, const SolverConfig& cfg);

/// f at the newest iterate that was already established when the counter
/// read `q` (the final f if the run stopped earlier).
double checkpoint_value(const RunTrace& trace, std::int64_t q);

/// Mean of the two middle order statistics for even sizes.
double median(std::vector<double> values);

CampaignSummary summarize(const std::string& solver, const std::vector<RunResult>& runs,
                          const std::vector<std::int64_t>& checkpoints);

/// Runs `solver` on every problem of the suite. Instance i uses solver seed
/// cfg.seed + i. With jobs > 1 the runs are spread over worker threads; the
/// result order (and content) does not depend on jobs.
CampaignResult run_campaign(const std::vector<ProblemDescriptor>& suite, const SolverConfig& cfg,
                            SolverId solver,
                            const std::vector<std::int64_t>& checkpoints = {2000, 4000, 6000},
                            int jobs = 1);

}  // namespace zorsn
