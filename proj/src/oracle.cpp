#include "zorsn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace zorsn {

CountedOracle::CountedOracle(int dim, Function f) : dim_(dim), f_(std::move(f)) {
  if (dim_ <= 0) throw ContractViolation("CountedOracle: dimension must be positive");
  if (!f_) throw ContractViolation("CountedOracle: empty objective");
}

double CountedOracle::eval(const Vector& x) {
  if (x.size() != dim_) {
    throw ContractViolation("CountedOracle::eval: expected dimension " + std::to_string(dim_) +
                            ", got " + std::to_string(x.size()));
  }
  ++queries_;
  return f_(x);
}

Vector log_softmax(const Vector& logits) {
  const double shift = logits.maxCoeff();
  const Vector shifted = logits.array() - shift;
  const double log_sum = std::log(shifted.array().exp().sum());
  return shifted.array() - log_sum;
}

double cw_loss(const Vector& log_probs, int label, double omega) {
  const auto c = static_cast<int>(log_probs.size());
  if (c < 2) throw InvalidProblem("cw_loss: need at least two classes");
  if (label < 0 || label >= c) throw InvalidProblem("cw_loss: label out of range");
  double best_other = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < c; ++i) {
    if (i != label) best_other = std::max(best_other, log_probs[i]);
  }
  return std::max(best_other - log_probs[label], -omega);
}

}  // namespace zorsn
