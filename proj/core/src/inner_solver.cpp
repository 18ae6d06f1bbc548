#include "labelsearch/inner_solver.hpp"

#include <cmath>
#include <string>

#include "labelsearch/errors.hpp"

namespace labelsearch {

double soft_cross_entropy(const Matrix& probs, const Matrix& targets) {
  double total = 0.0;
  for (Index i = 0; i < probs.rows(); ++i) {
    for (Index k = 0; k < probs.cols(); ++k) {
      const double t = targets(i, k);
      if (t != 0.0) total -= t * std::log(probs(i, k));
    }
  }
  return total / static_cast<double>(probs.rows());
}

void softmax_rows(Matrix& logits) {
  for (Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

Matrix probe_predict(const Matrix& w2, const Matrix& phi2_rows) {
  Matrix probs = phi2_rows * w2.transpose();
  softmax_rows(probs);
  return probs;
}

Matrix probe_gradient(const Matrix& w2, const Matrix& phi2, const Matrix& targets,
                      double ridge) {
  Matrix residual = probe_predict(w2, phi2);
  // d/dlogits of -sum_k t_k log softmax_k is p * sum(t) - t.
  residual.array().colwise() *= targets.rowwise().sum().array();
  residual -= targets;
  Matrix grad = residual.transpose() * phi2 / static_cast<double>(phi2.rows());
  if (ridge != 0.0) grad += 2.0 * ridge * w2;
  return grad;
}

InnerTrajectory fit_probe(const Matrix& phi2, const Matrix& targets,
                          const ProbeOptions& options, const Matrix& w2_init) {
  if (options.steps < 1) {
    raise(ErrorKind::kConfig, "inner solver needs at least one step");
  }
  if (phi2.rows() != targets.rows() || w2_init.rows() != targets.cols() ||
      w2_init.cols() != phi2.cols()) {
    raise(ErrorKind::kConfig, "inner solver dimension mismatch");
  }
  InnerTrajectory trajectory;
  trajectory.options = options;
  trajectory.weights.reserve(static_cast<std::size_t>(options.steps) + 1);
  trajectory.weights.push_back(w2_init);
  for (int t = 0; t < options.steps; ++t) {
    const Matrix& current = trajectory.weights.back();
    Matrix next = current - options.lr * probe_gradient(current, phi2, targets, options.ridge);
    if (!next.allFinite()) {
      raise(ErrorKind::kNumerical,
            "inner gradient descent diverged at step " + std::to_string(t + 1));
    }
    trajectory.weights.push_back(std::move(next));
  }
  return trajectory;
}

Matrix backprop_probe_targets(const InnerTrajectory& trajectory, const Matrix& phi2,
                              const Matrix& targets, const Matrix& final_weights_grad) {
  const double lr = trajectory.options.lr;
  const double ridge = trajectory.options.ridge;
  const double inv_n = 1.0 / static_cast<double>(phi2.rows());
  const Vector target_mass = targets.rowwise().sum();

  Matrix w_bar = final_weights_grad;
  Matrix targets_bar = Matrix::Zero(targets.rows(), targets.cols());

  // Step t maps W_t to W_t - lr * G(W_t, Y) with
  // G = (1/n) (diag(mass) P - Y)^T A + 2 ridge W.
  for (int t = trajectory.steps() - 1; t >= 0; --t) {
    const Matrix& w = trajectory.weights[static_cast<std::size_t>(t)];
    const Matrix probs = probe_predict(w, phi2);
    const Matrix projected = phi2 * w_bar.transpose();  // n x K, row i = V a_i

    // Through Y: both the explicit -Y term and the per-row mass factor.
    const Vector weighted = (probs.array() * projected.array()).rowwise().sum();
    targets_bar += (lr * inv_n) * projected;
    targets_bar.colwise() -= (lr * inv_n) * weighted;

    // Through W: softmax Jacobian applied to projected rows, scaled by mass.
    Matrix h = probs.array() * (projected.colwise() - weighted).array();
    h.array().colwise() *= target_mass.array();
    Matrix step_bar = inv_n * h.transpose() * phi2;
    if (ridge != 0.0) step_bar += 2.0 * ridge * w_bar;
    w_bar -= lr * step_bar;
  }
  return targets_bar;
}

}  // namespace labelsearch
