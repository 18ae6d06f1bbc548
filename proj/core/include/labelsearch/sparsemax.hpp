#pragma once

#include <span>

#include "labelsearch/types.hpp"

namespace labelsearch {

/// Euclidean projection of `logits` onto the probability simplex, written to
/// `out` (same length). Returns the threshold tau such that
/// out[k] = max(logits[k] - tau, 0).
double sparsemax(std::span<const double> logits, std::span<double> out);

Vector sparsemax(const Vector& logits);

/// Row-wise sparsemax of an N x K logit matrix.
Matrix sparsemax_rows(const Matrix& logits);

/// Dense Jacobian diag(s) - s s^T / |S|, with s the support indicator of
/// sparsemax(logits). Symmetric with zero row sums.
Matrix sparsemax_jacobian(const Vector& logits);

/// Vector-Jacobian product using only the sparsemax output: entries outside
/// the support get zero, entries inside get grad minus its support mean.
void sparsemax_backward(std::span<const double> probs, std::span<const double> grad,
                        std::span<double> out);

}  // namespace labelsearch
