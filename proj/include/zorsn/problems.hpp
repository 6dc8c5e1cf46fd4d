#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "zorsn/oracle.hpp"
#include "zorsn/types.hpp"

namespace zorsn {

struct ProblemConstants {
  double L1 = 0.0;  // gradient Lipschitz constant (largest Hessian eigenvalue bound)
  double mu = 0.0;  // strong convexity
  double L2 = 0.0;  // Hessian Lipschitz constant
};

/// A reference problem with analytic derivatives and a known optimum.
class SmoothProblem {
 public:
  virtual ~SmoothProblem() = default;

  [[nodiscard]] virtual int dim() const = 0;
  [[nodiscard]] virtual double value(const Vector& x) const = 0;
  [[nodiscard]] virtual Vector gradient(const Vector& x) const = 0;
  [[nodiscard]] virtual Matrix hessian(const Vector& x) const = 0;
  [[nodiscard]] virtual ProblemConstants constants() const = 0;
  [[nodiscard]] virtual double f_star() const = 0;
  [[nodiscard]] virtual const Vector& x_star() const = 0;
  /// Seeded starting point for solver runs.
  [[nodiscard]] virtual const Vector& start_point() const = 0;
};

/// f(x) = 1/2 x^T H x + b^T x with H = Q diag(eigenvalues) Q^T.
class QuadraticProblem final : public SmoothProblem {
 public:
  QuadraticProblem(Vector eigenvalues, Matrix eigenvectors, Vector b, Vector start);

  [[nodiscard]] int dim() const override { return static_cast<int>(b_.size()); }
  [[nodiscard]] double value(const Vector& x) const override;
  [[nodiscard]] Vector gradient(const Vector& x) const override;
  [[nodiscard]] Matrix hessian(const Vector&) const override { return h_; }
  [[nodiscard]] ProblemConstants constants() const override;
  [[nodiscard]] double f_star() const override { return f_star_; }
  [[nodiscard]] const Vector& x_star() const override { return x_star_; }
  [[nodiscard]] const Vector& start_point() const override { return start_; }

  [[nodiscard]] const Matrix& hessian_matrix() const { return h_; }
  [[nodiscard]] const Vector& eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] const Matrix& eigenvectors() const { return eigenvectors_; }
  [[nodiscard]] const Vector& linear_term() const { return b_; }

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Vector b_;
  Vector start_;
  Matrix h_;
  Vector x_star_;
  double f_star_ = 0.0;
};

/// Random-rotation quadratic. A constant spectrum uses the identity basis so
/// that H is exactly lambda*I.
QuadraticProblem make_quadratic(int n, std::span<const double> spectrum, std::uint64_t seed,
                                const Vector& b = Vector());

/// f(x) = sum_i log(1 + exp(a_i^T x)) + (mu/2)||x||^2.
///
/// Constants, with A the matrix whose rows are a_i and sigma the logistic
/// function:
///   H(x) = A^T diag(sigma_i (1 - sigma_i)) A + mu I, so mu <= eig(H) <= ||A||_2^2 / 4 + mu.
///   The third directional derivative is sum_i phi'''(a_i^T x) (a_i^T u)^3 with
///   phi''' = sigma (1 - sigma)(1 - 2 sigma), |phi'''| <= 1/(6 sqrt 3). Bounding
///   sum |a_i^T u|^3 <= max_i ||a_i|| * ||A u||^2 gives, for unit u,
///   L2 = max_i ||a_i|| * ||A||_2^2 / (6 sqrt 3).
/// The optimum is found once by damped exact Newton to ||g|| <= 1e-12.
class SmoothConvexProblem final : public SmoothProblem {
 public:
  SmoothConvexProblem(Matrix rows, double mu, Vector start);

  [[nodiscard]] int dim() const override { return static_cast<int>(rows_.cols()); }
  [[nodiscard]] double value(const Vector& x) const override;
  [[nodiscard]] Vector gradient(const Vector& x) const override;
  [[nodiscard]] Matrix hessian(const Vector& x) const override;
  [[nodiscard]] ProblemConstants constants() const override { return constants_; }
  [[nodiscard]] double f_star() const override { return f_star_; }
  [[nodiscard]] const Vector& x_star() const override { return x_star_; }
  [[nodiscard]] const Vector& start_point() const override { return start_; }

  [[nodiscard]] const Matrix& rows() const { return rows_; }

  /// Largest |phi'''| for the soft-plus term.
  static double third_derivative_bound();

 private:
  Matrix rows_;
  double mu_;
  Vector start_;
  ProblemConstants constants_;
  Vector x_star_;
  double f_star_ = 0.0;
};

SmoothConvexProblem make_smooth_convex(int n, int rows, double mu, std::uint64_t seed);

/// l-infinity ball {x : ||x - center||_inf <= radius}.
struct BoxRegion {
  Vector center;
  double radius = 0.0;

  [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const;
  [[nodiscard]] Vector project(const Vector& x) const;
};

/// Untargeted attack on a seeded affine + softmax classifier.
class ToyAttackProblem {
 public:
  ToyAttackProblem(Matrix weights, Vector bias, Vector x_nat, int label, double omega,
                   double epsilon);

  [[nodiscard]] int dim() const { return static_cast<int>(weights_.cols()); }
  [[nodiscard]] int classes() const { return static_cast<int>(weights_.rows()); }
  [[nodiscard]] Vector logits(const Vector& x) const;
  [[nodiscard]] Vector probabilities(const Vector& x) const;
  [[nodiscard]] double value(const Vector& x) const;

  [[nodiscard]] int label() const { return label_; }
  [[nodiscard]] double omega() const { return omega_; }
  [[nodiscard]] double epsilon() const { return epsilon_; }
  [[nodiscard]] const Vector& x_nat() const { return x_nat_; }
  [[nodiscard]] BoxRegion box() const { return {x_nat_, epsilon_}; }
  [[nodiscard]] const Matrix& weights() const { return weights_; }
  [[nodiscard]] const Vector& bias() const { return bias_; }

 private:
  Matrix weights_;
  Vector bias_;
  Vector x_nat_;
  int label_;
  double omega_;
  double epsilon_;
};

/// Classifier weights/bias come from weights_seed (shared across a suite);
/// the natural example x_nat ~ U[0,1]^n comes from instance_seed. `label` is
/// the class the attack drives to the top; a negative value picks the
/// runner-up at x_nat.
ToyAttackProblem make_toy_attack(int n, int classes, std::uint64_t weights_seed,
                                 std::uint64_t instance_seed, double epsilon, double omega,
                                 int label = -1);

enum class ProblemKind { Quadratic, SmoothConvex, ToyAttack };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

/// Serializable problem description. Field usage depends on kind:
///   quadratic:     n, seed, spectrum
///   smooth-convex: n, seed, rows, mu
///   toy-attack:    n, seed (instance), weights_seed, classes, epsilon, omega, label
struct ProblemDescriptor {
  ProblemKind kind = ProblemKind::Quadratic;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<double> spectrum;
  int rows = 0;
  double mu = 0.0;
  std::uint64_t weights_seed = 0;
  int classes = 10;
  double epsilon = 0.0;
  double omega = 0.0;
  int label = -1;

  bool operator==(const ProblemDescriptor&) const = default;
};

void to_json(nlohmann::json& j, const ProblemDescriptor& d);
void from_json(const nlohmann::json& j, ProblemDescriptor& d);

using AnyProblem = std::variant<QuadraticProblem, SmoothConvexProblem, ToyAttackProblem>;

AnyProblem build_problem(const ProblemDescriptor& d);

/// nullptr for black-box-only problems.
const SmoothProblem* as_smooth(const AnyProblem& p);

/// Wraps the problem's objective in a fresh counted oracle (the problem is
/// copied into shared immutable storage).
CountedOracle make_oracle(const AnyProblem& p);

[[nodiscard]] Vector start_point(const AnyProblem& p);
/// Known optimal value: f* for smooth problems, -omega for attacks.
[[nodiscard]] double optimal_value(const AnyProblem& p);
[[nodiscard]] int problem_dim(const AnyProblem& p);

}  // namespace zorsn
