#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zorsn/types.hpp"

namespace zorsn {

enum class SketchStrategy { Coordinate, Gaussian, Eigenvector };

std::string to_string(SketchStrategy s);
/// "coordinate" | "gaussian" | "eigen"
SketchStrategy sketch_strategy_from_string(const std::string& s);

/// n x m matrix with orthonormal columns.
///
/// For the coordinate and eigenvector strategies `indices[i]` records which
/// basis vector became column i (in column order, so growing appends).
struct Sketch {
  Matrix columns;
  SketchStrategy strategy = SketchStrategy::Coordinate;
  std::vector<int> indices;

  [[nodiscard]] int n() const { return static_cast<int>(columns.rows()); }
  [[nodiscard]] int m() const { return static_cast<int>(columns.cols()); }
  [[nodiscard]] Vector column(int i) const { return columns.col(i); }
};

/// Fresh sketch with m columns. Coordinate subsets come from a partial
/// Fisher-Yates shuffle; Gaussian columns are orthonormalized by modified
/// Gram-Schmidt with one re-orthogonalization pass (up to 8 resamples if a
/// column collapses).
Sketch draw_sketch(SketchStrategy strategy, int n, int m, Rng& rng);

/// m columns drawn uniformly without replacement from an orthonormal basis
/// (e.g. Hessian eigenvectors).
Sketch eigenvector_sketch(const Matrix& basis, int m, Rng& rng);

/// Appends one column orthonormal to the existing ones, same strategy.
/// Existing columns are copied bit-exactly. The eigenvector strategy needs
/// the basis it was drawn from.
Sketch grow_sketch(const Sketch& s, Rng& rng, const Matrix* basis = nullptr);

/// ||S^T S - I||_max
double orthonormality_defect(const Sketch& s);

/// Draws sketches of a fixed strategy; owns the basis for eigenvector sketches.
class SketchSampler {
 public:
  SketchSampler(SketchStrategy strategy, int n, std::optional<Matrix> basis = std::nullopt);

  Sketch draw(int m, Rng& rng) const;
  Sketch grow(const Sketch& s, Rng& rng) const;

  [[nodiscard]] SketchStrategy strategy() const { return strategy_; }
  [[nodiscard]] int n() const { return n_; }

 private:
  SketchStrategy strategy_;
  int n_;
  std::optional<Matrix> basis_;
};

}  // namespace zorsn
