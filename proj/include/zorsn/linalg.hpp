#pragma once

#include <optional>

#include "zorsn/types.hpp"

namespace zorsn {

/// Eigendecomposition of a small symmetric matrix; values ascending,
/// vectors.col(i) pairs with values[i].
struct SymEig {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius norm drops
/// below 1e-12 * ||A||_F, or after 64 sweeps.
SymEig sym_eig(const Matrix& a);

/// Solves A lambda = b for symmetric A. Uses a Cholesky factorization when A
/// is comfortably positive definite; otherwise falls back to the
/// eigendecomposition pseudo-inverse, dropping eigenvalues <= threshold.
/// The default threshold is 1e-10 * max|eigenvalue|.
Vector solve_spd(const Matrix& a, const Vector& b,
                 std::optional<double> pinv_threshold = std::nullopt);

/// Clamps the spectrum of a symmetric matrix into [lo, hi], keeping the eigenvectors.
Matrix project_eigenvalues(const Matrix& a, double lo, double hi);

/// Largest singular value of a symmetric matrix (max |eigenvalue|).
double sym_spectral_norm(const Matrix& a);

/// Max-norm asymmetry ||A - A^T||_max.
double asymmetry(const Matrix& a);

}  // namespace zorsn
