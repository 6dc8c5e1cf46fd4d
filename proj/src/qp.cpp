#include "zorsn/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "zorsn/linalg.hpp"

namespace zorsn {

namespace {

enum class Status { Free, AtLower, AtUpper };

void validate(const BoxQP& p) {
  const auto m = p.g.size();
  if (p.h.rows() != m || p.h.cols() != m || p.lower.size() != m || p.upper.size() != m)
    throw ContractViolation("BoxQP: inconsistent dimensions");
  if (!(p.gamma > 0.0)) throw ContractViolation("BoxQP: gamma must be positive");
  if ((p.lower.array() > p.upper.array()).any()) throw ContractViolation("BoxQP: lower > upper");
  if ((p.lower.array() > 0.0).any() || (p.upper.array() < 0.0).any())
    throw ContractViolation("BoxQP: lambda = 0 must be feasible");
  if (Eigen::LLT<Matrix>(p.h).info() != Eigen::Success)
    throw ContractViolation("BoxQP: H is not positive definite");
}

}  // namespace

double BoxQP::objective(const Vector& lambda) const {
  return gamma * g.dot(lambda) + 0.5 * gamma * lambda.dot(h * lambda);
}

BoxBounds reduce_constraints(const Vector& x_k, const BoxRegion& box, const Sketch& s, double gamma) {
  if (s.strategy != SketchStrategy::Coordinate)
    throw ContractViolation("reduce_constraints: unsupported constraint reduction for non-coordinate sketch");
  if (!(gamma > 0.0)) throw ContractViolation("reduce_constraints: gamma must be positive");
  if (x_k.size() != box.center.size() || s.n() != x_k.size())
    throw ContractViolation("reduce_constraints: dimension mismatch");
  if (!box.contains(x_k, 1e-12)) throw ContractViolation("reduce_constraints: current iterate is infeasible");

  BoxBounds b{Vector(s.m()), Vector(s.m())};
  for (int j = 0; j < s.m(); ++j) {
    const int c = s.indices[static_cast<std::size_t>(j)];
    // Rounding can put a boundary iterate a few ulps outside; keep 0 feasible.
    b.lower[j] = std::min(0.0, (box.center[c] - box.radius - x_k[c]) / gamma);
    b.upper[j] = std::max(0.0, (box.center[c] + box.radius - x_k[c]) / gamma);
  }
  return b;
}

double box_qp_kkt_residual(const BoxQP& p, const Vector& lambda) {
  const Vector r = p.g + p.h * lambda;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const bool at_lower = lambda[i] <= p.lower[i];
    const bool at_upper = lambda[i] >= p.upper[i];
    double v = 0.0;
    if (at_lower && at_upper) {
      v = 0.0;  // fixed variable
    } else if (at_lower) {
      v = std::max(0.0, -r[i]);
    } else if (at_upper) {
      v = std::max(0.0, r[i]);
    } else {
      v = std::abs(r[i]);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

Vector solve_box_qp(const BoxQP& p, double tol) {
  validate(p);
  const auto m = static_cast<int>(p.g.size());
  if (m == 0) return Vector();

  Vector lambda = solve_spd(p.h, -p.g).cwiseMax(p.lower).cwiseMin(p.upper);
  std::vector<Status> status(static_cast<std::size_t>(m), Status::Free);
  for (int i = 0; i < m; ++i) {
    if (lambda[i] <= p.lower[i]) status[static_cast<std::size_t>(i)] = Status::AtLower;
    else if (lambda[i] >= p.upper[i]) status[static_cast<std::size_t>(i)] = Status::AtUpper;
  }

  // Each pass adds or drops one bound, or takes a full subspace step.
  const int max_iter = 10 * (m + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vector r = p.g + p.h * lambda;
    std::vector<int> free;
    for (int i = 0; i < m; ++i)
      if (status[static_cast<std::size_t>(i)] == Status::Free) free.push_back(i);

    double free_residual = 0.0;
    for (int i : free) free_residual = std::max(free_residual, std::abs(r[i]));

    if (free_residual <= tol) {
      // Stationary on the current face; look for a bound to release.
      int release = -1;
      double worst = tol;
      for (int i = 0; i < m; ++i) {
        const auto st = status[static_cast<std::size_t>(i)];
        if (p.lower[i] == p.upper[i]) continue;
        const double violation = st == Status::AtLower ? -r[i] : st == Status::AtUpper ? r[i] : 0.0;
        if (violation > worst) {
          worst = violation;
          release = i;
        }
      }
      if (release < 0) break;
      status[static_cast<std::size_t>(release)] = Status::Free;
      continue;
    }

    const auto nf = static_cast<Eigen::Index>(free.size());
    Matrix hff(nf, nf);
    Vector rf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      rf[a] = r[free[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < nf; ++b)
        hff(a, b) = p.h(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    }
    const Vector pf = solve_spd(hff, -rf);

    double t = 1.0;
    int blocking = -1;
    for (Eigen::Index a = 0; a < nf; ++a) {
      const int i = free[static_cast<std::size_t>(a)];
      double ti = 1.0;
      if (pf[a] < 0.0) ti = (p.lower[i] - lambda[i]) / pf[a];
      else if (pf[a] > 0.0) ti = (p.upper[i] - lambda[i]) / pf[a];
      if (ti < t) {
        t = std::max(0.0, ti);
        blocking = i;
      }
    }
    for (Eigen::Index a = 0; a < nf; ++a) lambda[free[static_cast<std::size_t>(a)]] += t * pf[a];
    lambda = lambda.cwiseMax(p.lower).cwiseMin(p.upper);
    if (blocking >= 0) {
      const Eigen::Index a = std::find(free.begin(), free.end(), blocking) - free.begin();
      if (pf[a] < 0.0) {
        lambda[blocking] = p.lower[blocking];
        status[static_cast<std::size_t>(blocking)] = Status::AtLower;
      } else {
        lambda[blocking] = p.upper[blocking];
        status[static_cast<std::size_t>(blocking)] = Status::AtUpper;
      }
    }
  }
  return lambda;
}

}  // namespace zorsn
