#include "zorsn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace zorsn {

namespace {

// Independent streams derived from one user seed.
constexpr std::uint64_t kBasisStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStartStream = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kRowsStream = 0x94d049bb133111ebULL;

Matrix random_orthonormal(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

Vector gaussian_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------- quadratic

QuadraticProblem::QuadraticProblem(Vector eigenvalues, Matrix eigenvectors, Vector b, Vector start)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      b_(std::move(b)),
      start_(std::move(start)) {
  const auto n = eigenvalues_.size();
  if (n == 0 || eigenvectors_.rows() != n || eigenvectors_.cols() != n || b_.size() != n ||
      start_.size() != n) {
    throw InvalidProblem("QuadraticProblem: inconsistent dimensions");
  }
  if (eigenvalues_.minCoeff() <= 0.0) throw InvalidProblem("QuadraticProblem: invalid spectrum (nonpositive eigenvalue)");
  h_ = eigenvectors_ * eigenvalues_.asDiagonal() * eigenvectors_.transpose();
  h_ = 0.5 * (h_ + h_.transpose()).eval();
  const Vector qb = eigenvectors_.transpose() * b_;
  x_star_ = -(eigenvectors_ * qb.cwiseQuotient(eigenvalues_));
  f_star_ = -0.5 * qb.dot(qb.cwiseQuotient(eigenvalues_));
}

double QuadraticProblem::value(const Vector& x) const { return 0.5 * x.dot(h_ * x) + b_.dot(x); }

Vector QuadraticProblem::gradient(const Vector& x) const { return h_ * x + b_; }

ProblemConstants QuadraticProblem::constants() const {
  return {eigenvalues_.maxCoeff(), eigenvalues_.minCoeff(), 0.0};
}

QuadraticProblem make_quadratic(int n, std::span<const double> spectrum, std::uint64_t seed,
                                const Vector& b) {
  if (n <= 0) throw InvalidProblem("make_quadratic: n must be positive");
  if (static_cast<int>(spectrum.size()) != n)
    throw InvalidProblem("make_quadratic: spectrum length must equal n");
  Vector eig(n);
  for (int i = 0; i < n; ++i) {
    if (!(spectrum[i] > 0.0)) throw InvalidProblem("make_quadratic: invalid spectrum (nonpositive eigenvalue)");
    eig[i] = spectrum[i];
  }
  Rng basis_rng(seed ^ kBasisStream);
  const bool constant = eig.maxCoeff() == eig.minCoeff();
  Matrix q = constant ? Matrix::Identity(n, n) : random_orthonormal(n, basis_rng);
  Vector lin = b.size() == 0 ? Vector::Zero(n) : b;
  if (lin.size() != n) throw InvalidProblem("make_quadratic: b has wrong length");
  Rng start_rng(seed ^ kStartStream);
  return QuadraticProblem(std::move(eig), std::move(q), std::move(lin), gaussian_vector(n, start_rng));
}

// ------------------------------------------------------------ smooth convex

SmoothConvexProblem::SmoothConvexProblem(Matrix rows, double mu, Vector start)
    : rows_(std::move(rows)), mu_(mu), start_(std::move(start)) {
  if (rows_.rows() == 0 || rows_.cols() == 0) throw InvalidProblem("SmoothConvexProblem: empty data");
  if (!(mu_ > 0.0)) throw InvalidProblem("SmoothConvexProblem: mu must be positive");
  if (start_.size() != rows_.cols()) throw InvalidProblem("SmoothConvexProblem: bad start point");

  const Matrix gram = rows_.transpose() * rows_;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double a_norm_sq = es.eigenvalues().maxCoeff();
  const double max_row = rows_.rowwise().norm().maxCoeff();
  constants_.L1 = a_norm_sq / 4.0 + mu_;
  constants_.mu = mu_;
  constants_.L2 = third_derivative_bound() * max_row * a_norm_sq;

  // Reference optimum by damped Newton.
  Vector x = Vector::Zero(dim());
  for (int it = 0; it < 200; ++it) {
    const Vector g = gradient(x);
    if (g.norm() <= 1e-12) break;
    const Vector step = hessian(x).ldlt().solve(-g);
    double t = 1.0;
    const double fx = value(x);
    while (value(x + t * step) > fx + 1e-4 * t * g.dot(step) && t > 1e-12) t *= 0.5;
    const Vector next = x + t * step;
    if (next == x) break;
    x = next;
  }
  x_star_ = x;
  f_star_ = value(x_star_);
}

double SmoothConvexProblem::third_derivative_bound() { return 1.0 / (6.0 * std::sqrt(3.0)); }

double SmoothConvexProblem::value(const Vector& x) const {
  const Vector t = rows_ * x;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) sum += softplus(t[i]);
  return sum + 0.5 * mu_ * x.squaredNorm();
}

Vector SmoothConvexProblem::gradient(const Vector& x) const {
  const Vector t = rows_ * x;
  Vector s(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) s[i] = logistic(t[i]);
  return rows_.transpose() * s + mu_ * x;
}

Matrix SmoothConvexProblem::hessian(const Vector& x) const {
  const Vector t = rows_ * x;
  Vector w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double s = logistic(t[i]);
    w[i] = s * (1.0 - s);
  }
  Matrix h = rows_.transpose() * w.asDiagonal() * rows_;
  h.diagonal().array() += mu_;
  return 0.5 * (h + h.transpose());
}

SmoothConvexProblem make_smooth_convex(int n, int rows, double mu, std::uint64_t seed) {
  if (n <= 0 || rows <= 0) throw InvalidProblem("make_smooth_convex: sizes must be positive");
  Rng rng(seed ^ kRowsStream);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  Matrix a(rows, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < rows; ++i) a(i, j) = normal(rng);
  Rng start_rng(seed ^ kStartStream);
  return SmoothConvexProblem(std::move(a), mu, gaussian_vector(n, start_rng));
}

// ---------------------------------------------------------------------- box

bool BoxRegion::contains(const Vector& x, double tol) const {
  return (x - center).lpNorm<Eigen::Infinity>() <= radius + tol;
}

Vector BoxRegion::project(const Vector& x) const {
  return x.array().max(center.array() - radius).min(center.array() + radius).matrix();
}

// -------------------------------------------------------------- toy attack

ToyAttackProblem::ToyAttackProblem(Matrix weights, Vector bias, Vector x_nat, int label,
                                   double omega, double epsilon)
    : weights_(std::move(weights)),
      bias_(std::move(bias)),
      x_nat_(std::move(x_nat)),
      label_(label),
      omega_(omega),
      epsilon_(epsilon) {
  if (weights_.rows() < 2) throw InvalidProblem("ToyAttackProblem: need at least two classes");
  if (bias_.size() != weights_.rows() || x_nat_.size() != weights_.cols())
    throw InvalidProblem("ToyAttackProblem: inconsistent dimensions");
  if (label_ < 0 || label_ >= weights_.rows()) throw InvalidProblem("ToyAttackProblem: label out of range");
  if (!(omega_ > 0.0)) throw InvalidProblem("ToyAttackProblem: omega must be positive");
  if (!(epsilon_ > 0.0)) throw InvalidProblem("ToyAttackProblem: epsilon must be positive");
}

Vector ToyAttackProblem::logits(const Vector& x) const { return weights_ * x + bias_; }

Vector ToyAttackProblem::probabilities(const Vector& x) const {
  return log_softmax(logits(x)).array().exp();
}

double ToyAttackProblem::value(const Vector& x) const {
  return cw_loss(log_softmax(logits(x)), label_, omega_);
}

ToyAttackProblem make_toy_attack(int n, int classes, std::uint64_t weights_seed,
                                 std::uint64_t instance_seed, double epsilon, double omega,
                                 int label) {
  if (n <= 0) throw InvalidProblem("make_toy_attack: n must be positive");
  if (classes < 2) throw InvalidProblem("make_toy_attack: need at least two classes");
  Rng wrng(weights_seed);
  std::normal_distribution<double> normal;
  Matrix w(classes, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < classes; ++i) w(i, j) = normal(wrng);
  Vector bias(classes);
  for (int i = 0; i < classes; ++i) bias[i] = normal(wrng);

  Rng xrng(instance_seed ^ kStartStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x_nat(n);
  for (int i = 0; i < n; ++i) x_nat[i] = unit(xrng);

  if (label < 0) {
    // The loss is minimized by pushing class `label` ahead of all others, so
    // the default target is the runner-up at x_nat.
    const Vector z = w * x_nat + bias;
    Eigen::Index top = 0;
    z.maxCoeff(&top);
    Eigen::Index second = top == 0 ? 1 : 0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (i != top && z[i] > z[second]) second = i;
    label = static_cast<int>(second);
  }
  return ToyAttackProblem(std::move(w), std::move(bias), std::move(x_nat), label, omega, epsilon);
}

// -------------------------------------------------------------- descriptor

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Quadratic: return "quadratic";
    case ProblemKind::SmoothConvex: return "smooth-convex";
    case ProblemKind::ToyAttack: return "toy-attack";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "quadratic") return ProblemKind::Quadratic;
  if (s == "smooth-convex") return ProblemKind::SmoothConvex;
  if (s == "toy-attack") return ProblemKind::ToyAttack;
  throw InvalidProblem("unknown problem kind '" + s + "'");
}

void to_json(nlohmann::json& j, const ProblemDescriptor& d) {
  j = nlohmann::json::object();
  j["kind"] = to_string(d.kind);
  j["n"] = d.n;
  j["seed"] = d.seed;
  switch (d.kind) {
    case ProblemKind::Quadratic:
      j["spectrum"] = d.spectrum;
      break;
    case ProblemKind::SmoothConvex:
      j["rows"] = d.rows;
      j["mu"] = d.mu;
      break;
    case ProblemKind::ToyAttack:
      j["weights_seed"] = d.weights_seed;
      j["classes"] = d.classes;
      j["epsilon"] = d.epsilon;
      j["omega"] = d.omega;
      j["label"] = d.label;
      break;
  }
}

void from_json(const nlohmann::json& j, ProblemDescriptor& d) {
  d = ProblemDescriptor{};
  d.kind = problem_kind_from_string(j.at("kind").get<std::string>());
  d.n = j.at("n").get<int>();
  d.seed = j.at("seed").get<std::uint64_t>();
  switch (d.kind) {
    case ProblemKind::Quadratic:
      d.spectrum = j.at("spectrum").get<std::vector<double>>();
      break;
    case ProblemKind::SmoothConvex:
      d.rows = j.at("rows").get<int>();
      d.mu = j.at("mu").get<double>();
      break;
    case ProblemKind::ToyAttack:
      d.weights_seed = j.at("weights_seed").get<std::uint64_t>();
      d.classes = j.value("classes", 10);
      d.epsilon = j.at("epsilon").get<double>();
      d.omega = j.at("omega").get<double>();
      d.label = j.value("label", -1);
      break;
  }
}

AnyProblem build_problem(const ProblemDescriptor& d) {
  switch (d.kind) {
    case ProblemKind::Quadratic: return make_quadratic(d.n, d.spectrum, d.seed);
    case ProblemKind::SmoothConvex: return make_smooth_convex(d.n, d.rows, d.mu, d.seed);
    case ProblemKind::ToyAttack:
      return make_toy_attack(d.n, d.classes, d.weights_seed, d.seed, d.epsilon, d.omega, d.label);
  }
  throw InvalidProblem("build_problem: unknown kind");
}

const SmoothProblem* as_smooth(const AnyProblem& p) {
  if (const auto* q = std::get_if<QuadraticProblem>(&p)) return q;
  if (const auto* s = std::get_if<SmoothConvexProblem>(&p)) return s;
  return nullptr;
}

CountedOracle make_oracle(const AnyProblem& p) {
  auto shared = std::make_shared<const AnyProblem>(p);
  return CountedOracle(problem_dim(p), [shared](const Vector& x) {
    return std::visit([&x](const auto& prob) { return prob.value(x); }, *shared);
  });
}

Vector start_point(const AnyProblem& p) {
  if (const auto* t = std::get_if<ToyAttackProblem>(&p)) return t->x_nat();
  return as_smooth(p)->start_point();
}

double optimal_value(const AnyProblem& p) {
  if (const auto* t = std::get_if<ToyAttackProblem>(&p)) return -t->omega();
  return as_smooth(p)->f_star();
}

int problem_dim(const AnyProblem& p) {
  return std::visit([](const auto& prob) { return prob.dim(); }, p);
}

}  // namespace zorsn
