#include "zorsn/estimators.hpp"

#include <cmath>

#include "zorsn/linalg.hpp"

namespace zorsn {

namespace {

ProbeKey single(int i) { return {{i, 1}}; }
ProbeKey pair_key(int i, int j) {
  if (i == j) return {{i, 2}};
  if (i > j) std::swap(i, j);
  return {{i, 1}, {j, 1}};
}

double probe(CountedOracle& oracle, const Vector& x, const Sketch& s, double alpha,
             const ProbeKey& key, SketchedModel& model) {
  if (auto it = model.probe_cache.find(key); it != model.probe_cache.end()) return it->second;
  Vector y = x;
  for (const auto& [col, mult] : key)
    for (int r = 0; r < mult; ++r) y += alpha * s.columns.col(col);
  const double v = oracle.eval(y);
  model.probe_cache.emplace(key, v);
  ++model.queries_used;
  return v;
}

double gradient_entry(double fi, double f0, double alpha) { return (fi - f0) / alpha; }

double hessian_entry(double fij, double fi, double fj, double f0, double alpha) {
  return (((fij - fi) - fj) + f0) / (alpha * alpha);
}

void validate(const Vector& x, const Sketch& s, double alpha, const CountedOracle& oracle) {
  if (!(alpha > 0.0)) throw ContractViolation("finite-difference step alpha must be positive");
  if (x.size() != oracle.dim() || s.n() != oracle.dim())
    throw ContractViolation("sketched model: dimension mismatch");
  if (!x.allFinite()) throw ContractViolation("sketched model: non-finite base point");
}

}  // namespace

SketchedModel build_model(CountedOracle& oracle, const Vector& x, const Sketch& s, double alpha) {
  validate(x, s, alpha, oracle);
  const int m = s.m();
  SketchedModel model;
  model.alpha = alpha;
  model.sketch = s;
  model.x = x;
  model.g_tilde.resize(m);
  model.h_tilde.resize(m, m);

  model.f_x = probe(oracle, x, s, alpha, ProbeKey{}, model);
  std::vector<double> fi(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    fi[static_cast<std::size_t>(i)] = probe(oracle, x, s, alpha, single(i), model);
    model.g_tilde[i] = gradient_entry(fi[static_cast<std::size_t>(i)], model.f_x, alpha);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const double fij = probe(oracle, x, s, alpha, pair_key(i, j), model);
      const double h = hessian_entry(fij, fi[static_cast<std::size_t>(i)],
                                     fi[static_cast<std::size_t>(j)], model.f_x, alpha);
      model.h_tilde(i, j) = h;
      model.h_tilde(j, i) = h;
    }
  }
  return model;
}

SketchedModel extend_model(CountedOracle& oracle, const Vector& x, const SketchedModel& model,
                           const Sketch& grown) {
  validate(x, grown, model.alpha, oracle);
  const int m = model.m();
  if (grown.m() != m + 1 || grown.n() != model.sketch.n())
    throw ContractViolation("extend_model: grown sketch must add exactly one column");
  if (!(grown.columns.leftCols(m).array() == model.sketch.columns.array()).all())
    throw ContractViolation("extend_model: grown sketch does not extend the model's sketch");
  if (!(x.array() == model.x.array()).all())
    throw ContractViolation("extend_model: base point differs from the model's");

  SketchedModel out = model;
  out.sketch = grown;
  out.g_tilde.conservativeResize(m + 1);
  out.h_tilde.conservativeResize(m + 1, m + 1);

  const double alpha = out.alpha;
  const double f_new = probe(oracle, x, grown, alpha, single(m), out);
  out.g_tilde[m] = gradient_entry(f_new, out.f_x, alpha);
  for (int j = 0; j <= m; ++j) {
    const double fj = j == m ? f_new : out.probe_cache.at(single(j));
    const double fjm = probe(oracle, x, grown, alpha, pair_key(j, m), out);
    const double h = hessian_entry(fjm, fj, f_new, out.f_x, alpha);
    out.h_tilde(j, m) = h;
    out.h_tilde(m, j) = h;
  }
  return out;
}

ModelError model_error(const SketchedModel& model, const Vector& exact_sg, const Matrix& exact_shs) {
  if (exact_sg.size() != model.m() || exact_shs.rows() != model.m() || exact_shs.cols() != model.m())
    throw ContractViolation("model_error: exact quantities have the wrong size");
  const Matrix diff = model.h_tilde - exact_shs;
  return {(model.g_tilde - exact_sg).norm(), sym_spectral_norm(0.5 * (diff + diff.transpose()))};
}

}  // namespace zorsn
