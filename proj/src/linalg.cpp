#include "zorsn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace zorsn {

namespace {

constexpr int kMaxSweeps = 64;
constexpr double kSymmetryTol = 1e-10;

void require_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) throw ContractViolation(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (asymmetry(a) > kSymmetryTol * scale)
    throw ContractViolation(std::string(who) + ": matrix is not symmetric");
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

double asymmetry(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

SymEig sym_eig(const Matrix& input) {
  require_symmetric(input, "sym_eig");
  const Eigen::Index m = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(m, m);

  const double threshold = 1e-12 * a.norm();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= threshold) break;
    for (Eigen::Index p = 0; p < m - 1; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p,q) (Golub & Van Loan, sym.schur2).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymEig out{Vector(m), Matrix(m, m)};
  for (Eigen::Index k = 0; k < m; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

Vector solve_spd(const Matrix& a, const Vector& b, std::optional<double> pinv_threshold) {
  require_symmetric(a, "solve_spd");
  if (b.size() != a.rows()) throw ContractViolation("solve_spd: right-hand side has wrong length");
  if (a.rows() == 0) return Vector();

  // Fast path: Cholesky, accepted only when the conditioning estimate keeps
  // the smallest eigenvalue well above the truncation threshold.
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    const double lambda_min_est = llt.rcond() * norm1 / static_cast<double>(a.rows());
    const double threshold = pinv_threshold.value_or(1e-10 * norm1);
    if (lambda_min_est > 100.0 * threshold) return llt.solve(b);
  }

  const SymEig eig = sym_eig(a);
  const double scale = eig.values.cwiseAbs().maxCoeff();
  const double threshold = pinv_threshold.value_or(1e-10 * scale);
  const Vector coeffs = eig.vectors.transpose() * b;
  Vector y = Vector::Zero(a.rows());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] > threshold) y[i] = coeffs[i] / eig.values[i];
  }
  return eig.vectors * y;
}

Matrix project_eigenvalues(const Matrix& a, double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo)) throw ContractViolation("project_eigenvalues: invalid interval");
  const SymEig eig = sym_eig(a);
  const Vector clamped = eig.values.cwiseMax(lo).cwiseMin(hi);
  Matrix out = eig.vectors * clamped.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

double sym_spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return sym_eig(a).values.cwiseAbs().maxCoeff();
}

}  // namespace zorsn
