#pragma once

#include <cstdint>
#include <vector>

#include "labelsearch/types.hpp"

namespace labelsearch {

/// Pivot norm below which Gram-Schmidt treats the rows as dependent.
inline constexpr double kMinPivotNorm = 1e-10;

/// Row-wise modified Gram-Schmidt that records its intermediates so the
/// orthonormalization can be differentiated in reverse mode.
class GramSchmidt {
 public:
  /// Orthonormalizes the rows of `m` (K x d, K <= d). Throws a degenerate
  /// error when a pivot norm falls below kMinPivotNorm.
  const Matrix& forward(const Matrix& m);

  /// Given dL/dQ for the last forward output, returns dL/dM.
  Matrix backward(const Matrix& q_grad) const;

  const Matrix& output() const { return q_; }

 private:
  Matrix q_;
  Vector pivots_;
  // partials_[i] holds row i after each of its i projection steps
  // (i + 1 rows); coeffs_[i][j] = <q_j, partials_[i].row(j)>.
  std::vector<Matrix> partials_;
  std::vector<Vector> coeffs_;
};

Matrix orthonormalize(const Matrix& m);

/// Frobenius norm of W W^T - I.
double orthonormality_defect(const Matrix& w);

/// Linear prototype task encoder: labels are sparsemax(W1 x / gamma) where
/// W1 = orthonormalize(m) and x is a unit-norm sample embedding.
struct TaskEncoder {
  Matrix m;  // K x d1, unconstrained
  double gamma = 0.1;
  std::uint64_t seed = 0;

  int num_classes() const { return static_cast<int>(m.rows()); }
  int input_dim() const { return static_cast<int>(m.cols()); }
  Matrix prototypes() const { return orthonormalize(m); }

  bool operator==(const TaskEncoder& other) const {
    return gamma == other.gamma && seed == other.seed && m == other.m;
  }
};

/// Soft labeling with its argmax view. `hard[i]` takes the lowest index
/// among maximal entries of row i.
struct Labeling {
  Matrix probs;  // N x K, rows on the simplex
  HardLabels hard;
};

HardLabels argmax_rows(const Matrix& probs);

/// Draws M with i.i.d. standard normal entries from `seed` and stores its
/// orthonormalized rows. Throws a configuration error if K > d1.
TaskEncoder ortho_rand(int num_classes, int input_dim, std::uint64_t seed,
                       double gamma = 0.1);

/// Cosine logits W1 x / gamma for unit-norm rows of phi1_hat (N x K).
Matrix encoder_logits(const Matrix& prototypes, const Matrix& phi1_hat, double gamma);

Labeling encode(const TaskEncoder& encoder, const Matrix& phi1_hat);

}  // namespace labelsearch
