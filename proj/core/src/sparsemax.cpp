#include "labelsearch/sparsemax.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <vector>

namespace labelsearch {

double sparsemax(std::span<const double> logits, std::span<double> out) {
  assert(logits.size() == out.size() && !logits.empty());
  const std::size_t k = logits.size();

  // tau >= max - 1, so only entries above that can be in the support.
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> sorted;
  sorted.reserve(k);
  for (double z : logits) {
    if (z > top - 1.0) sorted.push_back(z);
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // Largest support size r with 1 + r * z_(r) > sum_{j<=r} z_(j).
  double cumulative = 0.0;
  double support_sum = sorted[0];
  std::size_t support = 1;
  for (std::size_t r = 1; r <= sorted.size(); ++r) {
    cumulative += sorted[r - 1];
    if (1.0 + static_cast<double>(r) * sorted[r - 1] > cumulative) {
      support = r;
      support_sum = cumulative;
    }
  }
  const double tau = (support_sum - 1.0) / static_cast<double>(support);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = std::max(logits[i] - tau, 0.0);
  }
  return tau;
}

Vector sparsemax(const Vector& logits) {
  Vector out(logits.size());
  sparsemax(std::span(logits.data(), static_cast<std::size_t>(logits.size())),
            std::span(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Matrix sparsemax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  const auto k = static_cast<std::size_t>(logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    sparsemax(std::span(logits.row(i).data(), k), std::span(out.row(i).data(), k));
  }
  return out;
}

Matrix sparsemax_jacobian(const Vector& logits) {
  const Vector p = sparsemax(logits);
  const Index k = p.size();
  Vector support = (p.array() > 0.0).cast<double>();
  const double size = support.sum();
  Matrix jac = Matrix::Zero(k, k);
  jac.diagonal() = support;
  jac -= support * support.transpose() / size;
  return jac;
}

void sparsemax_backward(std::span<const double> probs, std::span<const double> grad,
                        std::span<double> out) {
  double sum = 0.0;
  std::size_t size = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      sum += grad[i];
      ++size;
    }
  }
  const double mean = sum / static_cast<double>(size);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] > 0.0 ? grad[i] - mean : 0.0;
  }
}

}  // namespace labelsearch
