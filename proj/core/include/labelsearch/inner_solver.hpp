#pragma once

#include <vector>

#include "labelsearch/types.hpp"

namespace labelsearch {

/// Mean soft-target cross-entropy -(1/N) sum_ik t_ik log p_ik. Terms with a
/// zero target contribute nothing, so zero probabilities there are harmless.
double soft_cross_entropy(const Matrix& probs, const Matrix& targets);

/// Row-wise softmax of phi2_rows * W2^T, max-shifted.
Matrix probe_predict(const Matrix& w2, const Matrix& phi2_rows);

/// In-place row-wise softmax.
void softmax_rows(Matrix& logits);

struct ProbeOptions {
  int steps = 300;
  double lr = 1e-3;
  double ridge = 0.0;  // adds ridge * ||W2||_F^2 to the objective
};

/// Gradient of the inner objective at W2.
Matrix probe_gradient(const Matrix& w2, const Matrix& phi2, const Matrix& targets,
                      double ridge);

/// The iterates of plain gradient descent on the multiclass logistic loss.
/// weights[0] is the initialization and weights[t + 1] = weights[t] - lr *
/// probe_gradient(weights[t]). Softmax outputs are recomputed on the
/// reverse pass rather than stored, keeping memory at (m + 1) K x d2.
struct InnerTrajectory {
  std::vector<Matrix> weights;
  ProbeOptions options;

  const Matrix& final_weights() const { return weights.back(); }
  int steps() const { return static_cast<int>(weights.size()) - 1; }
};

/// Runs `options.steps` gradient-descent steps from `w2_init`. Summation
/// order is fixed, so identical inputs reproduce every iterate bit for bit.
/// Throws a numerical error naming the step at which an iterate went
/// non-finite.
InnerTrajectory fit_probe(const Matrix& phi2, const Matrix& targets,
                          const ProbeOptions& options, const Matrix& w2_init);

/// Reverse pass through the unrolled updates: given dL/dW2 at the final
/// iterate, returns dL/d(targets) accumulated over all steps.
Matrix backprop_probe_targets(const InnerTrajectory& trajectory, const Matrix& phi2,
                              const Matrix& targets, const Matrix& final_weights_grad);

}  // namespace labelsearch
