#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "zorsn/types.hpp"

namespace zorsn {

/// Black-box objective with an exact cumulative query counter.
///
/// This is the only path through which solvers touch the objective. The
/// counter goes up by one per eval() and is never reset; an instance is
/// single-owner state (movable, not meant to be shared across threads).
class CountedOracle {
 public:
  using Function = std::function<double(const Vector&)>;

  CountedOracle(int dim, Function f);

  double eval(const Vector& x);

  [[nodiscard]] std::int64_t queries() const noexcept { return queries_; }
  [[nodiscard]] int dim() const noexcept { return dim_; }

 private:
  int dim_;
  Function f_;
  std::int64_t queries_ = 0;
};

/// Numerically stable log-softmax (max logit subtracted first).
Vector log_softmax(const Vector& logits);

/// Carlini-Wagner style margin loss on log-probabilities:
/// max{ max_{i != label} logp_i - logp_label, -omega }.
double cw_loss(const Vector& log_probs, int label, double omega);

}  // namespace zorsn
