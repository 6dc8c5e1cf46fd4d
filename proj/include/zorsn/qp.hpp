#pragma once

#include "zorsn/problems.hpp"
#include "zorsn/sketch.hpp"
#include "zorsn/types.hpp"

namespace zorsn {

/// minimize  gamma * g^T lambda + (gamma/2) lambda^T H lambda
/// s.t.      lower <= lambda <= upper
/// with H symmetric positive definite and lower <= 0 <= upper.
struct BoxQP {
  Vector g;
  Matrix h;
  double gamma = 1.0;
  Vector lower;
  Vector upper;

  [[nodiscard]] double objective(const Vector& lambda) const;
};

struct BoxBounds {
  Vector lower;
  Vector upper;
};

/// Bounds on lambda keeping x_k + gamma * S lambda inside the box. Only
/// coordinate sketches reduce to per-variable bounds; anything else is rejected.
BoxBounds reduce_constraints(const Vector& x_k, const BoxRegion& box, const Sketch& s, double gamma);

/// Exact minimizer by a primal active-set method started from
/// clamp(-H^{-1} g): each pass fixes the bound set, solves the free
/// subsystem, and either steps to the first blocking bound or releases the
/// bound with the most negative multiplier.
Vector solve_box_qp(const BoxQP& p, double tol = 1e-10);

/// Per-coordinate KKT violation of a candidate (gradient r = g + H lambda):
/// |r_i| for interior entries, the wrong-signed part of r_i at a bound.
double box_qp_kkt_residual(const BoxQP& p, const Vector& lambda);

}  // namespace zorsn
