#include <doctest.h>

#include "support/qp_oracle.hpp"
#include "zorsn/linalg.hpp"
#include "zorsn/qp.hpp"

using namespace zorsn;

namespace {

BoxQP make(std::initializer_list<double> g, const Matrix& h, double lo, double hi, double gamma = 1.0) {
  BoxQP p;
  p.g = Vector(static_cast<Eigen::Index>(g.size()));
  Eigen::Index i = 0;
  for (double v : g) p.g[i++] = v;
  p.h = h;
  p.gamma = gamma;
  p.lower = Vector::Constant(p.g.size(), lo);
  p.upper = Vector::Constant(p.g.size(), hi);
  return p;
}

Sketch coords(int n, std::vector<int> idx) {
  Sketch s;
  s.columns = Matrix::Zero(n, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) s.columns(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  s.indices = std::move(idx);
  return s;
}

}  // namespace

TEST_CASE("scalar QP examples") {
  const Matrix two = Matrix::Constant(1, 1, 2.0);
  CHECK(solve_box_qp(make({1.0}, two, -10.0, 10.0))[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(solve_box_qp(make({1.0}, two, 0.0, 10.0))[0] == 0.0);
}

TEST_CASE("separable clamp in two dimensions") {
  const BoxQP p = make({1.0, 1.0}, Matrix::Identity(2, 2), -0.2, 0.2);
  const Vector l = solve_box_qp(p);
  CHECK(l[0] == -0.2);
  CHECK(l[1] == -0.2);
  // grid at resolution 1e-3 on [-0.2, 0.2] has 401 points per axis
  CHECK(p.objective(l) <= testing::grid_search_min(p, 401) + 1e-12);
}

TEST_CASE("coupled active set: a bound must be released") {
  // Unconstrained minimum is outside; the clamped start point sits on a face
  // that is not optimal, so the solver has to free a variable again.
  Matrix h(2, 2);
  h << 1.0, 0.9, 0.9, 1.0;
  BoxQP p = make({-1.0, 0.5}, h, -0.3, 0.3);
  const Vector l = solve_box_qp(p);
  CHECK(box_qp_kkt_residual(p, l) <= 1e-10);
  CHECK(p.objective(l) <= testing::grid_search_min(p) + 1e-9);
}

TEST_CASE("interior Newton step is returned unchanged") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    BoxQP p = testing::random_box_qp(1 + t % 3, rng);
    const Vector newton = solve_spd(p.h, -p.g);
    p.lower = p.lower.cwiseMin(newton - Vector::Constant(newton.size(), 0.1));
    p.upper = p.upper.cwiseMax(newton + Vector::Constant(newton.size(), 0.1));
    p.lower = p.lower.cwiseMin(0.0);
    p.upper = p.upper.cwiseMax(0.0);
    CHECK((solve_box_qp(p) - newton).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("random instances: feasible, KKT, no worse than 0 or the grid") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 150; ++t) {
    const BoxQP p = testing::random_box_qp(1 + t % 3, rng);
    const Vector l = solve_box_qp(p);
    CHECK((l.array() >= p.lower.array()).all());
    CHECK((l.array() <= p.upper.array()).all());
    CHECK(box_qp_kkt_residual(p, l) <= 1e-8);
    CHECK(p.objective(l) <= 0.0);
    CHECK(p.objective(l) <= testing::grid_search_min(p, 200) + 1e-6);
  }
}

TEST_CASE("degenerate box with a fixed variable") {
  Matrix h(2, 2);
  h << 2.0, 0.5, 0.5, 1.0;
  BoxQP p = make({1.0, -1.0}, h, -1.0, 1.0);
  p.lower[0] = 0.0;
  p.upper[0] = 0.0;
  const Vector l = solve_box_qp(p);
  CHECK(l[0] == 0.0);
  CHECK(l[1] == doctest::Approx(1.0));
}

TEST_CASE("invalid QPs") {
  CHECK_THROWS_AS(solve_box_qp(make({1.0}, Matrix::Constant(1, 1, -1.0), -1.0, 1.0)), ContractViolation);
  CHECK_THROWS_AS(solve_box_qp(make({1.0}, Matrix::Constant(1, 1, 1.0), 0.5, 1.0)), ContractViolation);
  CHECK_THROWS_AS(solve_box_qp(make({1.0}, Matrix::Constant(1, 1, 1.0), -1.0, 1.0, 0.0)), ContractViolation);
}

TEST_CASE("constraint reduction examples") {
  BoxRegion box{Vector::Zero(4), 0.3};
  const Sketch s = coords(4, {2, 0});

  BoxBounds b = reduce_constraints(Vector::Zero(4), box, s, 1.0);
  CHECK(b.lower[0] == doctest::Approx(-0.3));
  CHECK(b.upper[0] == doctest::Approx(0.3));
  CHECK(b.lower[1] == doctest::Approx(-0.3));

  Vector x = Vector::Zero(4);
  x[2] = 0.3;
  b = reduce_constraints(x, box, s, 1.0);
  CHECK(b.lower[0] == doctest::Approx(-0.6));
  CHECK(b.upper[0] == 0.0);

  const BoxBounds half = reduce_constraints(x, box, s, 2.0);
  CHECK(half.lower[0] == doctest::Approx(-0.3));
  CHECK(half.upper[0] == 0.0);
  CHECK(half.upper[1] == doctest::Approx(0.15));
}

TEST_CASE("constraint reduction keeps steps inside the box") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const BoxRegion box{Vector::LinSpaced(6, -1.0, 1.0), 0.25};
  for (int t = 0; t < 200; ++t) {
    Vector x = box.center;
    for (int i = 0; i < 6; ++i) x[i] += 0.25 * u(rng);
    const double gamma = 0.5 + std::abs(u(rng));
    const Sketch s = draw_sketch(SketchStrategy::Coordinate, 6, 1 + t % 6, rng);
    const BoxBounds b = reduce_constraints(x, box, s, gamma);
    Vector lambda(s.m());
    for (int j = 0; j < s.m(); ++j) lambda[j] = (u(rng) > 0.0) ? b.upper[j] : b.lower[j];
    CHECK(box.contains(x + gamma * s.columns * lambda, 1e-12));
  }
}

TEST_CASE("constraint reduction errors") {
  BoxRegion box{Vector::Zero(3), 0.3};
  Rng rng(1);
  const Sketch gauss = draw_sketch(SketchStrategy::Gaussian, 3, 2, rng);
  CHECK_THROWS_AS(reduce_constraints(Vector::Zero(3), box, gauss, 1.0), ContractViolation);
  Vector outside = Vector::Zero(3);
  outside[1] = 0.5;
  CHECK_THROWS_AS(reduce_constraints(outside, box, coords(3, {0}), 1.0), ContractViolation);
}
