#include "labelsearch/task_encoder.hpp"

#include <random>
#include <string>

#include "labelsearch/errors.hpp"
#include "labelsearch/sparsemax.hpp"

namespace labelsearch {

const Matrix& GramSchmidt::forward(const Matrix& m) {
  const Index k = m.rows();
  const Index d = m.cols();
  if (k > d) {
    raise(ErrorKind::kConfig, "cannot orthonormalize " + std::to_string(k) +
                                  " rows in dimension " + std::to_string(d));
  }
  q_.resize(k, d);
  pivots_.resize(k);
  partials_.assign(static_cast<std::size_t>(k), Matrix());
  coeffs_.assign(static_cast<std::size_t>(k), Vector());

  for (Index i = 0; i < k; ++i) {
    auto& partial = partials_[static_cast<std::size_t>(i)];
    auto& coeff = coeffs_[static_cast<std::size_t>(i)];
    partial.resize(i + 1, d);
    coeff.resize(i);
    partial.row(0) = m.row(i);
    for (Index j = 0; j < i; ++j) {
      coeff(j) = q_.row(j).dot(partial.row(j));
      partial.row(j + 1) = partial.row(j) - coeff(j) * q_.row(j);
    }
    const double norm = partial.row(i).norm();
    if (!(norm >= kMinPivotNorm)) {
      raise(ErrorKind::kDegenerate,
            "row " + std::to_string(i) + " is linearly dependent on earlier rows");
    }
    pivots_(i) = norm;
    q_.row(i) = partial.row(i) / norm;
  }
  return q_;
}

Matrix GramSchmidt::backward(const Matrix& q_grad) const {
  const Index k = q_.rows();
  Matrix q_bar = q_grad;
  Matrix m_bar(k, q_.cols());

  // Row i feeds every later row's projections, so walk rows backwards and
  // let later rows deposit into q_bar before row i is processed.
  for (Index i = k - 1; i >= 0; --i) {
    const auto& partial = partials_[static_cast<std::size_t>(i)];
    const auto& coeff = coeffs_[static_cast<std::size_t>(i)];
    const RowVector qi = q_.row(i);
    RowVector v_bar = (q_bar.row(i) - qi * qi.dot(q_bar.row(i))) / pivots_(i);
    for (Index j = i - 1; j >= 0; --j) {
      const double c_bar = -q_.row(j).dot(v_bar);
      q_bar.row(j) += -coeff(j) * v_bar + c_bar * partial.row(j);
      v_bar += c_bar * q_.row(j);
    }
    m_bar.row(i) = v_bar;
  }
  return m_bar;
}

Matrix orthonormalize(const Matrix& m) {
  GramSchmidt gs;
  return gs.forward(m);
}

double orthonormality_defect(const Matrix& w) {
  const Matrix gram = w * w.transpose();
  return (gram - Matrix::Identity(w.rows(), w.rows())).norm();
}

HardLabels argmax_rows(const Matrix& probs) {
  HardLabels hard(static_cast<std::size_t>(probs.rows()));
  for (Index i = 0; i < probs.rows(); ++i) {
    Index best = 0;
    for (Index k = 1; k < probs.cols(); ++k) {
      if (probs(i, k) > probs(i, best)) best = k;
    }
    hard[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return hard;
}

TaskEncoder ortho_rand(int num_classes, int input_dim, std::uint64_t seed, double gamma) {
  if (num_classes < 1 || input_dim < 1 || num_classes > input_dim) {
    raise(ErrorKind::kConfig, "need 1 <= K <= d1, got K=" + std::to_string(num_classes) +
                                  ", d1=" + std::to_string(input_dim));
  }
  if (!(gamma > 0.0)) {
    raise(ErrorKind::kConfig, "temperature must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(num_classes, input_dim);
  for (Index i = 0; i < m.size(); ++i) {
    m.data()[i] = normal(rng);
  }
  TaskEncoder encoder;
  encoder.m = orthonormalize(m);
  encoder.gamma = gamma;
  encoder.seed = seed;
  return encoder;
}

Matrix encoder_logits(const Matrix& prototypes, const Matrix& phi1_hat, double gamma) {
  if (phi1_hat.cols() != prototypes.cols()) {
    raise(ErrorKind::kConfig, "embedding dimension " + std::to_string(phi1_hat.cols()) +
                                  " does not match encoder dimension " +
                                  std::to_string(prototypes.cols()));
  }
  return (phi1_hat * prototypes.transpose()) / gamma;
}

Labeling encode(const TaskEncoder& encoder, const Matrix& phi1_hat) {
  Labeling labeling;
  labeling.probs = sparsemax_rows(encoder_logits(encoder.prototypes(), phi1_hat, encoder.gamma));
  labeling.hard = argmax_rows(labeling.probs);
  return labeling;
}

}  // namespace labelsearch
