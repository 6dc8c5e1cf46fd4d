#include "zorsn/sketch.hpp"

#include <algorithm>
#include <numeric>

namespace zorsn {

namespace {

constexpr int kMaxResamples = 8;
// A Gaussian column whose residual after projection falls below this
// fraction of its original norm is treated as rank deficient.
constexpr double kCollapseRatio = 1e-8;

void check_size(int n, int m) {
  if (n <= 0) throw InvalidSketch("sketch: n must be positive");
  if (m < 1 || m > n) throw InvalidSketch("sketch: need 1 <= m <= n (m=" + std::to_string(m) +
                                          ", n=" + std::to_string(n) + ")");
}

// Partial Fisher-Yates: the first m entries of `pool` become a uniform m-subset.
std::vector<int> sample_without_replacement(int n, int m, Rng& rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return pool;
}

int pick_unused(int n, const std::vector<int>& used, Rng& rng) {
  std::vector<int> remaining;
  remaining.reserve(static_cast<std::size_t>(n) - used.size());
  for (int i = 0; i < n; ++i)
    if (std::find(used.begin(), used.end(), i) == used.end()) remaining.push_back(i);
  std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
  return remaining[pick(rng)];
}

// Orthogonalizes v against the first `count` columns of q (two MGS passes)
// and normalizes it. Returns false if v collapsed.
bool orthonormalize_against(const Matrix& q, Eigen::Index count, Vector& v) {
  const double original = v.norm();
  if (original == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < count; ++j) v -= q.col(j).dot(v) * q.col(j);
  }
  const double residual = v.norm();
  if (residual <= kCollapseRatio * original) return false;
  v /= residual;
  return true;
}

Vector gaussian(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

std::string to_string(SketchStrategy s) {
  switch (s) {
    case SketchStrategy::Coordinate: return "coordinate";
    case SketchStrategy::Gaussian: return "gaussian";
    case SketchStrategy::Eigenvector: return "eigen";
  }
  return "unknown";
}

SketchStrategy sketch_strategy_from_string(const std::string& s) {
  if (s == "coordinate") return SketchStrategy::Coordinate;
  if (s == "gaussian") return SketchStrategy::Gaussian;
  if (s == "eigen") return SketchStrategy::Eigenvector;
  throw InvalidSketch("unknown sketch strategy '" + s + "'");
}

Sketch draw_sketch(SketchStrategy strategy, int n, int m, Rng& rng) {
  check_size(n, m);
  Sketch s;
  s.strategy = strategy;
  switch (strategy) {
    case SketchStrategy::Coordinate: {
      s.indices = sample_without_replacement(n, m, rng);
      s.columns = Matrix::Zero(n, m);
      for (int i = 0; i < m; ++i) s.columns(s.indices[static_cast<std::size_t>(i)], i) = 1.0;
      return s;
    }
    case SketchStrategy::Gaussian: {
      s.columns = Matrix::Zero(n, m);
      for (int j = 0; j < m; ++j) {
        int attempt = 0;
        while (true) {
          Vector v = gaussian(n, rng);
          if (orthonormalize_against(s.columns, j, v)) {
            s.columns.col(j) = v;
            break;
          }
          if (++attempt >= kMaxResamples) throw InvalidSketch("draw_sketch: Gaussian columns remained rank deficient");
        }
      }
      return s;
    }
    case SketchStrategy::Eigenvector:
      throw InvalidSketch("draw_sketch: eigenvector sketches need a basis (use eigenvector_sketch)");
  }
  throw InvalidSketch("draw_sketch: unknown strategy");
}

namespace {

void check_basis(const Matrix& basis) {
  const auto n = basis.rows();
  if (basis.cols() != n) throw InvalidSketch("eigenvector sketch: basis must be square");
  if ((basis.transpose() * basis - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidSketch("eigenvector sketch: basis is not orthonormal");
}

Sketch basis_subset(const Matrix& basis, int m, Rng& rng) {
  const auto n = static_cast<int>(basis.rows());
  check_size(n, m);
  Sketch s;
  s.strategy = SketchStrategy::Eigenvector;
  s.indices = sample_without_replacement(n, m, rng);
  s.columns.resize(n, m);
  for (int i = 0; i < m; ++i) s.columns.col(i) = basis.col(s.indices[static_cast<std::size_t>(i)]);
  return s;
}

}  // namespace

Sketch eigenvector_sketch(const Matrix& basis, int m, Rng& rng) {
  check_basis(basis);
  return basis_subset(basis, m, rng);
}

Sketch grow_sketch(const Sketch& s, Rng& rng, const Matrix* basis) {
  const int n = s.n();
  const int m = s.m();
  if (m >= n) throw InvalidSketch("grow_sketch: cannot grow, sketch already spans R^n");
  Sketch out = s;
  out.columns.conservativeResize(n, m + 1);
  switch (s.strategy) {
    case SketchStrategy::Coordinate: {
      const int idx = pick_unused(n, s.indices, rng);
      out.indices.push_back(idx);
      out.columns.col(m).setZero();
      out.columns(idx, m) = 1.0;
      return out;
    }
    case SketchStrategy::Eigenvector: {
      if (basis == nullptr) throw InvalidSketch("grow_sketch: eigenvector sketch needs its basis");
      const int idx = pick_unused(n, s.indices, rng);
      out.indices.push_back(idx);
      out.columns.col(m) = basis->col(idx);
      return out;
    }
    case SketchStrategy::Gaussian: {
      for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
        Vector v = gaussian(n, rng);
        if (orthonormalize_against(s.columns, m, v)) {
          out.columns.col(m) = v;
          return out;
        }
      }
      throw InvalidSketch("grow_sketch: Gaussian column remained rank deficient");
    }
  }
  throw InvalidSketch("grow_sketch: unknown strategy");
}

double orthonormality_defect(const Sketch& s) {
  const Matrix gram = s.columns.transpose() * s.columns;
  return (gram - Matrix::Identity(s.m(), s.m())).cwiseAbs().maxCoeff();
}

SketchSampler::SketchSampler(SketchStrategy strategy, int n, std::optional<Matrix> basis)
    : strategy_(strategy), n_(n), basis_(std::move(basis)) {
  if (strategy_ == SketchStrategy::Eigenvector && !basis_)
    throw InvalidSketch("SketchSampler: eigenvector strategy needs a basis");
  if (basis_) {
    if (basis_->rows() != n_) throw InvalidSketch("SketchSampler: basis has wrong shape");
    check_basis(*basis_);
  }
}

Sketch SketchSampler::draw(int m, Rng& rng) const {
  if (strategy_ == SketchStrategy::Eigenvector) return basis_subset(*basis_, m, rng);
  return draw_sketch(strategy_, n_, m, rng);
}

Sketch SketchSampler::grow(const Sketch& s, Rng& rng) const {
  return grow_sketch(s, rng, basis_ ? &*basis_ : nullptr);
}

}  // namespace zorsn
