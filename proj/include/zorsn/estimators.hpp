#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "zorsn/oracle.hpp"
#include "zorsn/sketch.hpp"
#include "zorsn/types.hpp"

namespace zorsn {

/// Probe offset x + alpha * sum(multiplier * s_column), stored as sorted
/// (column, multiplier) pairs. Keys never involve floating-point coordinates.
using ProbeKey = std::vector<std::pair<int, int>>;

/// Finite-difference model of the sketched gradient S^T g and Hessian S^T H S.
struct SketchedModel {
  Vector g_tilde;
  Matrix h_tilde;  // symmetric by construction (mirrored)
  double alpha = 0.0;
  double f_x = 0.0;
  std::map<ProbeKey, double> probe_cache;
  std::int64_t queries_used = 0;
  Sketch sketch;
  Vector x;

  [[nodiscard]] int m() const { return static_cast<int>(g_tilde.size()); }
};

/// 1 + m + m(m+1)/2: base point, one probe per column, one per unordered pair
/// (the diagonal uses x + 2 alpha s_i).
constexpr std::int64_t model_query_count(int m) {
  return 1 + m + static_cast<std::int64_t>(m) * (m + 1) / 2;
}

/// [g]_i = (f(x + a s_i) - f(x)) / a
/// [H]_ij = (f(x + a s_i + a s_j) - f(x + a s_i) - f(x + a s_j) + f(x)) / a^2
SketchedModel build_model(CountedOracle& oracle, const Vector& x, const Sketch& s, double alpha);

/// Adds one gradient entry and one Hessian row/column for a sketch grown by a
/// single column. Reuses every cached probe, so the cost is exactly m + 2
/// evaluations; the result matches build_model on the grown sketch bit-for-bit.
SketchedModel extend_model(CountedOracle& oracle, const Vector& x, const SketchedModel& model,
                           const Sketch& grown);

struct ModelError {
  double gradient = 0.0;  // ||g~ - S^T g||_2
  double hessian = 0.0;   // ||H~ - S^T H S||_2 (largest singular value)
};

ModelError model_error(const SketchedModel& model, const Vector& exact_sg, const Matrix& exact_shs);

}  // namespace zorsn
