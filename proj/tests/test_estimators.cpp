#include <doctest.h>

#include <cmath>
#include <set>

#include "zorsn/estimators.hpp"
#include "zorsn/problems.hpp"

using namespace zorsn;

namespace {

CountedOracle half_norm(int n) {
  return CountedOracle(n, [](const Vector& x) { return 0.5 * x.squaredNorm(); });
}

Sketch coordinate(int n, std::vector<int> idx) {
  Sketch s;
  s.strategy = SketchStrategy::Coordinate;
  s.columns = Matrix::Zero(n, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) s.columns(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  s.indices = std::move(idx);
  return s;
}

Vector e1(int n) {
  Vector x = Vector::Zero(n);
  x[0] = 1.0;
  return x;
}

}  // namespace

TEST_CASE("gradient of 1/2||x||^2 along e1 at (1,0)") {
  CountedOracle oracle = half_norm(2);
  const SketchedModel m = build_model(oracle, e1(2), coordinate(2, {0}), 0.1);
  // ((1.1^2)/2 - 1/2) / 0.1 = 1.05, error alpha/2 * s^T H s = 0.05
  CHECK(m.g_tilde[0] == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(std::abs(m.g_tilde[0] - 1.0) == doctest::Approx(0.05).epsilon(1e-10));
}

TEST_CASE("Hessian of 1/2||x||^2 from the four hand-evaluated probes") {
  CountedOracle oracle = half_norm(2);
  const SketchedModel m = build_model(oracle, e1(2), coordinate(2, {0, 1}), 0.1);
  // f values: f(x)=0.5, f(x+a e1)=0.605, f(x+a e2)=0.505, f(x+a e1+a e2)=0.61, f(x+2a e1)=0.72
  const double off = (0.61 - 0.605 - 0.505 + 0.5) / 0.01;
  const double diag = (0.72 - 2 * 0.605 + 0.5) / 0.01;
  CHECK(m.h_tilde(0, 1) == doctest::Approx(off).scale(1.0).epsilon(1e-12));
  CHECK(m.h_tilde(0, 0) == doctest::Approx(diag).epsilon(1e-12));
  CHECK(m.h_tilde(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.h_tilde(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m.h_tilde(0, 1)) <= 1e-12);
  CHECK(m.h_tilde(0, 1) == m.h_tilde(1, 0));
}

TEST_CASE("query count 1 + m + m(m+1)/2 with no duplicate probes") {
  for (int m = 1; m <= 10; ++m) {
    CountedOracle oracle(12, [](const Vector& x) { return std::cos(x.sum()) + x.squaredNorm(); });
    Rng rng(static_cast<std::uint64_t>(m));
    const Sketch s = draw_sketch(SketchStrategy::Gaussian, 12, m, rng);
    const SketchedModel model = build_model(oracle, Vector::Ones(12), s, 1e-3);
    const std::int64_t expected = 1 + m + m * (m + 1) / 2;
    CHECK(oracle.queries() == expected);
    CHECK(model.queries_used == expected);
    CHECK(model_query_count(m) == expected);
    CHECK(static_cast<std::int64_t>(model.probe_cache.size()) == expected);
    CHECK((model.h_tilde - model.h_tilde.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(model_query_count(3) == 10);
}

TEST_CASE("extending a model costs m + 2 queries and equals a fresh build") {
  const SmoothConvexProblem p = make_smooth_convex(8, 16, 0.3, 2);
  Rng rng(11);
  for (int m = 1; m < 8; ++m) {
    for (auto strategy : {SketchStrategy::Coordinate, SketchStrategy::Gaussian}) {
      CountedOracle oracle(8, [&p](const Vector& x) { return p.value(x); });
      const Vector x = Vector::LinSpaced(8, -1.0, 0.7);
      const Sketch s = draw_sketch(strategy, 8, m, rng);
      const SketchedModel base = build_model(oracle, x, s, 1e-2);
      const Sketch grown = grow_sketch(s, rng);
      const std::int64_t before = oracle.queries();
      const SketchedModel ext = extend_model(oracle, x, base, grown);
      CHECK(oracle.queries() - before == m + 2);

      CountedOracle fresh_oracle(8, [&p](const Vector& y) { return p.value(y); });
      const SketchedModel fresh = build_model(fresh_oracle, x, grown, 1e-2);
      CHECK((ext.g_tilde.array() == fresh.g_tilde.array()).all());
      CHECK((ext.h_tilde.array() == fresh.h_tilde.array()).all());
      CHECK(ext.queries_used == fresh.queries_used);
    }
  }
}

TEST_CASE("extend_model rejects mismatched sketches") {
  CountedOracle oracle = half_norm(4);
  const SketchedModel base = build_model(oracle, e1(4), coordinate(4, {0, 2}), 0.1);
  CHECK_THROWS_AS(extend_model(oracle, e1(4), base, coordinate(4, {1, 2, 3})), ContractViolation);
  CHECK_THROWS_AS(extend_model(oracle, e1(4), base, coordinate(4, {0, 2, 1, 3})), ContractViolation);
  CHECK_THROWS_AS(extend_model(oracle, Vector::Zero(4), base, coordinate(4, {0, 2, 1})), ContractViolation);
}

TEST_CASE("alpha must be positive") {
  CountedOracle oracle = half_norm(2);
  CHECK_THROWS_AS(build_model(oracle, e1(2), coordinate(2, {0}), 0.0), ContractViolation);
  CHECK(oracle.queries() == 0);
}

TEST_CASE("quadratic Hessian estimate is exact up to rounding, also after growth") {
  const std::vector<double> spectrum{0.5, 1.0, 2.0, 3.0, 4.0};
  const QuadraticProblem q = make_quadratic(5, spectrum, 3);
  Rng rng(12);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 100; ++t) {
    CountedOracle oracle(5, [&q](const Vector& x) { return q.value(x); });
    Vector x(5);
    for (int i = 0; i < 5; ++i) x[i] = normal(rng);
    const double alpha = t % 2 ? 0.1 : 1e-2;
    const Sketch s = draw_sketch(SketchStrategy::Gaussian, 5, 1 + t % 4, rng);
    const SketchedModel base = build_model(oracle, x, s, alpha);
    const Sketch grown = grow_sketch(s, rng);
    const SketchedModel ext = extend_model(oracle, x, base, grown);
    const Matrix exact = grown.columns.transpose() * q.hessian_matrix() * grown.columns;
    const Vector sg = grown.columns.transpose() * q.gradient(x);
    const ModelError err = model_error(ext, sg, exact);
    CHECK(err.hessian <= 1e-9);
  }
}

TEST_CASE("gradient error bound example: L1=4, m=4, alpha=0.01") {
  const std::vector<double> spectrum{1.0, 2.0, 3.0, 4.0};
  const QuadraticProblem q = make_quadratic(4, spectrum, 8);
  Rng rng(13);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 200; ++t) {
    CountedOracle oracle(4, [&q](const Vector& x) { return q.value(x); });
    Vector x(4);
    for (int i = 0; i < 4; ++i) x[i] = normal(rng);
    const Sketch s = draw_sketch(t % 2 ? SketchStrategy::Gaussian : SketchStrategy::Coordinate, 4, 4, rng);
    const SketchedModel m = build_model(oracle, x, s, 0.01);
    const ModelError err = model_error(m, s.columns.transpose() * q.gradient(x),
                                       s.columns.transpose() * q.hessian_matrix() * s.columns);
    CHECK(err.gradient <= 0.04 + 1e-9);
  }
}

TEST_CASE("positive definiteness transfers when the Hessian error is below mu") {
  const SmoothConvexProblem p = make_smooth_convex(6, 10, 0.5, 21);
  const double mu = p.constants().mu;
  Rng rng(14);
  std::normal_distribution<double> normal;
  int tested = 0;
  for (int t = 0; t < 300; ++t) {
    CountedOracle oracle(6, [&p](const Vector& x) { return p.value(x); });
    Vector x(6);
    for (int i = 0; i < 6; ++i) x[i] = 2.0 * normal(rng);
    const Sketch s = draw_sketch(SketchStrategy::Gaussian, 6, 1 + t % 6, rng);
    const double alpha = std::pow(10.0, -1.0 - (t % 3));
    const SketchedModel m = build_model(oracle, x, s, alpha);
    const Matrix exact = s.columns.transpose() * p.hessian(x) * s.columns;
    const ModelError err = model_error(m, s.columns.transpose() * p.gradient(x), 0.5 * (exact + exact.transpose()));
    if (err.hessian < mu) {
      ++tested;
      const Eigen::SelfAdjointEigenSolver<Matrix> es(m.h_tilde);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
  CHECK(tested > 100);
}
