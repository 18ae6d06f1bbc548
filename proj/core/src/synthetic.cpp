#include "labelsearch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "labelsearch/errors.hpp"
#include "labelsearch/inner_solver.hpp"
#include "labelsearch/logging.hpp"
#include "labelsearch/meta_opt.hpp"
#include "labelsearch/task_encoder.hpp"

namespace labelsearch {
namespace {

constexpr int kMaxAttempts = 5;
constexpr int kProbeSteps = 500;

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = normal(rng);
  return out;
}

// Rows orthonormal: `rows` orthonormal vectors in dimension `dim`.
Matrix random_orthonormal(Index rows, Index dim, std::mt19937_64& rng) {
  return orthonormalize(gaussian(rows, dim, rng));
}

HardLabels balanced_labels(Index n, int k, std::mt19937_64& rng) {
  HardLabels labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % k);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

// Standardized features with a trailing bias column.
Matrix design_matrix(const Matrix& features, const Matrix& reference) {
  const RowVector mean = reference.colwise().mean();
  RowVector scale =
      ((reference.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(reference.rows()))
          .cwiseSqrt();
  for (Index j = 0; j < scale.size(); ++j) {
    if (scale(j) < 1e-12) scale(j) = 1.0;
  }
  Matrix out(features.rows(), features.cols() + 1);
  out.leftCols(features.cols()) = (features.rowwise() - mean).array().rowwise() / scale.array();
  out.col(features.cols()).setOnes();
  return out;
}

Matrix one_hot(const HardLabels& labels, int k) {
  Matrix out = Matrix::Zero(static_cast<Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) out(static_cast<Index>(i), labels[i]) = 1.0;
  return out;
}

Matrix fit_certifying_probe(const Matrix& design, const HardLabels& labels, int k) {
  // Step size from the curvature bound 0.5 * lambda_max(A^T A / n).
  const Matrix gram = design.transpose() * design / static_cast<double>(design.rows());
  const double lambda = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff();
  ProbeOptions options{kProbeSteps, 1.0 / (0.5 * lambda), 0.0};
  const auto fit = fit_probe(design, one_hot(labels, k), options,
                             Matrix::Zero(k, design.cols()));
  return fit.final_weights();
}

double agreement(const Matrix& probs, const HardLabels& labels) {
  const HardLabels predicted = argmax_rows(probs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace

void SynthSpec::validate() const {
  auto fail = [](const std::string& what) { raise(ErrorKind::kConfig, what); };
  if (n_samples < 2) fail("synthetic N must be at least 2");
  if (num_classes < 2) fail("synthetic K must be at least 2");
  if (n_samples < num_classes) fail("synthetic N must be at least K");
  if (num_classes > std::min(d1, d2)) fail("synthetic K must not exceed min(d1, d2)");
  if (latent_dim < num_classes) fail("latent dimension must be at least K");
  if (latent_dim > std::min(d1, d2)) fail("latent dimension must not exceed min(d1, d2)");
  if (spurious && latent_dim + num_classes > d1) fail("spurious labeling needs d1 >= latent + K");
  if (!(cluster_separation > 0.0)) fail("cluster separation must be positive");
  if (!(noise_sigma >= 0.0) || !(ambient_sigma >= 0.0)) fail("noise levels must be non-negative");
}

double probe_train_accuracy(const Matrix& features, const HardLabels& labels, int num_classes) {
  const Matrix design = design_matrix(features, features);
  const Matrix w = fit_certifying_probe(design, labels, num_classes);
  return agreement(probe_predict(w, design), labels);
}

double probe_heldout_accuracy(const Matrix& features, const HardLabels& labels, int num_classes,
                              const std::vector<bool>& train_mask) {
  IndexList train, test;
  for (std::size_t i = 0; i < train_mask.size(); ++i) {
    (train_mask[i] ? train : test).push_back(static_cast<Index>(i));
  }
  const Matrix train_rows = gather_rows(features, train);
  HardLabels train_labels, test_labels;
  for (Index i : train) train_labels.push_back(labels[static_cast<std::size_t>(i)]);
  for (Index i : test) test_labels.push_back(labels[static_cast<std::size_t>(i)]);
  const Matrix w = fit_certifying_probe(design_matrix(train_rows, train_rows), train_labels,
                                        num_classes);
  return agreement(probe_predict(w, design_matrix(gather_rows(features, test), train_rows)),
                   test_labels);
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const Index n = spec.n_samples;
  const int k = spec.num_classes;

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::mt19937_64 rng = derive_rng(spec.seed, 0x73796e00u + static_cast<std::uint64_t>(attempt));

    HardLabels labels = balanced_labels(n, k, rng);
    // Orthonormal directions scaled so every pair of means is
    // cluster_separation apart.
    const Matrix centers =
        random_orthonormal(k, spec.latent_dim, rng) * (spec.cluster_separation / std::sqrt(2.0));
    Matrix latent = gaussian(n, spec.latent_dim, rng, spec.noise_sigma);
    for (Index i = 0; i < n; ++i) latent.row(i) += centers.row(labels[static_cast<std::size_t>(i)]);

    const Matrix a1 = gaussian(spec.d1, spec.latent_dim, rng, 1.0 / std::sqrt(spec.latent_dim));
    const Matrix a2 = gaussian(spec.d2, spec.latent_dim, rng, 1.0 / std::sqrt(spec.latent_dim));
    const Matrix rotation = random_orthonormal(spec.latent_dim, spec.latent_dim, rng);
    RowVector shift1 = gaussian(1, spec.d1, rng);
    RowVector shift2 = gaussian(1, spec.d2, rng);
    shift1 *= spec.offset / shift1.norm();
    shift2 *= spec.offset / shift2.norm();

    Matrix phi1 = latent * a1.transpose() + gaussian(n, spec.d1, rng, spec.ambient_sigma);
    phi1.rowwise() += shift1;

    Matrix warped = latent * rotation.transpose();
    warped = warped.array() + 0.5 * warped.array().tanh();
    Matrix phi2 = warped * a2.transpose() + gaussian(n, spec.d2, rng, spec.ambient_sigma);
    phi2.rowwise() += shift2;

    std::optional<HardLabels> spurious;
    if (spec.spurious) {
      spurious = balanced_labels(n, k, rng);
      // Spurious class means live in directions of phi1 orthogonal to the
      // planted signal's column space.
      const Matrix basis = orthonormalize(
          (Matrix(spec.latent_dim + k, spec.d1) << a1.transpose(), gaussian(k, spec.d1, rng))
              .finished());
      const Matrix directions = basis.bottomRows(k) * (spec.spurious_separation / std::sqrt(2.0));
      for (Index i = 0; i < n; ++i) {
        phi1.row(i) += directions.row((*spurious)[static_cast<std::size_t>(i)]);
      }
    }

    SynthDiagnostics diag;
    diag.attempts = attempt + 1;
    diag.planted_phi1 = probe_train_accuracy(phi1, labels, k);
    diag.planted_phi2 = probe_train_accuracy(phi2, labels, k);
    bool certified = diag.planted_phi1 >= spec.min_probe_accuracy &&
                     diag.planted_phi2 >= spec.min_probe_accuracy;
    if (spurious) {
      std::vector<bool> half(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) half[static_cast<std::size_t>(i)] = i % 2 == 0;
      diag.spurious_phi1 = probe_train_accuracy(phi1, *spurious, k);
      diag.spurious_phi2_heldout = probe_heldout_accuracy(phi2, *spurious, k, half);
      certified = certified && *diag.spurious_phi1 >= spec.min_probe_accuracy &&
                  *diag.spurious_phi2_heldout <= 1.0 / k + 0.15;
    }
    logger()->info("synthetic attempt {}: planted probes {:.4f}/{:.4f}", attempt + 1,
                   diag.planted_phi1, diag.planted_phi2);
    if (!certified) continue;

    SynthData data;
    data.phi1.manifest = {"phi1", static_cast<std::size_t>(n), static_cast<std::size_t>(spec.d1),
                          "f32", "phi1.f32", false, std::nullopt};
    data.phi2.manifest = {"phi2", static_cast<std::size_t>(n), static_cast<std::size_t>(spec.d2),
                          "f32", "phi2.f32", false, std::nullopt};
    // Stored spaces go through f32, so round here to keep in-memory and
    // on-disk fixtures identical.
    data.phi1.matrix = phi1.cast<float>().cast<double>();
    data.phi2.matrix = phi2.cast<float>().cast<double>();
    data.truth = {std::move(labels), k};
    if (spurious) data.spurious = GroundTruthLabels{std::move(*spurious), k};
    data.diagnostics = diag;
    return data;
  }
  raise(ErrorKind::kData, "synthetic fixture failed probe certification after " +
                              std::to_string(kMaxAttempts) + " attempts");
}

}  // namespace labelsearch
