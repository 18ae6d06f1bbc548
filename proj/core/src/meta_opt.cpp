#include "labelsearch/meta_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "labelsearch/errors.hpp"
#include "labelsearch/evaluation.hpp"
#include "labelsearch/logging.hpp"
#include "labelsearch/sparsemax.hpp"

namespace labelsearch {

// ---------------------------------------------------------------------------
// Configuration

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { raise(ErrorKind::kConfig, what); };
  if (num_classes < 2) fail("K must be at least 2");
  if (iterations < 0) fail("iterations must be non-negative");
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (inner_steps < 1) fail("inner steps must be at least 1");
  if (!(inner_lr > 0.0)) fail("inner learning rate must be positive");
  if (!(eta >= 0.0)) fail("eta must be non-negative");
  if (!(gamma > 0.0)) fail("gamma must be positive");
  if (subset_size < 2) fail("subset size must be at least 2");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train fraction must be in (0, 1)");
  if (n_subsets < 1) fail("n_subsets must be at least 1");
  if (!(clip_norm > 0.0)) fail("clip norm must be positive");
  if (!(anneal_factor > 0.0)) fail("anneal factor must be positive");
  if (!(ridge >= 0.0)) fail("ridge must be non-negative");
  if (cv_folds < 1) fail("cv folds must be at least 1");
}

TrainConfig preset_config(std::string_view name) {
  TrainConfig config;
  config.preset = std::string(name);
  if (name == "default") {
    return config;
  }
  if (name == "stl10-inductive") {
    config.subset_size = 5000;
    return config;
  }
  if (name == "stl10-transductive") {
    config.subset_size = 8000;
    return config;
  }
  if (name == "imagenet") {
    config.num_classes = 1000;
    config.subset_size = 20000;
    config.train_fraction = 0.7;
    config.alpha = 0.1;
    config.inner_lr = 0.1;
    config.inner_steps = 100;
    config.anneal_iters.clear();
    return config;
  }
  if (name == "synthetic") {
    // Desk-scale fixtures: whole-dataset subsets, fewer and larger inner
    // steps, a shorter outer loop with annealing moved earlier.
    config.num_classes = 5;
    config.iterations = 150;
    config.alpha = 0.05;
    config.inner_steps = 10;
    config.inner_lr = 2.0;
    config.subset_size = 2000;
    config.n_subsets = 2;
    config.anneal_iters = {100};
    config.cv_folds = 5;
    config.normalize_phi2 = true;
    return config;
  }
  raise(ErrorKind::kConfig, "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"default", "stl10-inductive", "stl10-transductive", "imagenet", "synthetic"};
}

// ---------------------------------------------------------------------------
// Splits

SplitIndices sample_splits(std::size_t n, std::size_t subset_size, double train_fraction,
                           std::mt19937_64& rng) {
  if (subset_size > n) {
    raise(ErrorKind::kConfig, "subset size " + std::to_string(subset_size) +
                                  " exceeds dataset size " + std::to_string(n));
  }
  if (subset_size < 2) {
    raise(ErrorKind::kConfig, "subset size must be at least 2");
  }
  auto n_train = static_cast<std::size_t>(
      std::llround(static_cast<double>(subset_size) * train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, subset_size - 1);

  // Partial Fisher-Yates: the first subset_size slots end up uniformly
  // sampled without replacement.
  IndexList pool(n);
  std::iota(pool.begin(), pool.end(), Index{0});
  for (std::size_t i = 0; i < subset_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  SplitIndices split;
  split.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train),
                    pool.begin() + static_cast<std::ptrdiff_t>(subset_size));
  return split;
}

Matrix gather_rows(const Matrix& matrix, const IndexList& indices) {
  Matrix out(static_cast<Index>(indices.size()), matrix.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Index>(i)) = matrix.row(indices[i]);
  }
  return out;
}

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), 0x6c61626cu};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Objective

double entropy_regularizer(const Matrix& rows) {
  const RowVector mean = rows.colwise().mean();
  double entropy = 0.0;
  for (Index k = 0; k < mean.size(); ++k) {
    if (mean(k) > 0.0) entropy -= mean(k) * std::log(mean(k));
  }
  return entropy;
}

OuterForward outer_loss(const TaskEncoder& encoder, const Matrix& phi1_hat,
                        const Matrix& phi2, const SplitIndices& split,
                        const TrainConfig& config) {
  OuterForward fwd;
  fwd.gamma = encoder.gamma;
  fwd.eta = config.eta;
  fwd.n_train = static_cast<Index>(split.train.size());
  fwd.subset = split.train;
  fwd.subset.insert(fwd.subset.end(), split.test.begin(), split.test.end());

  const Matrix& prototypes = fwd.gram_schmidt.forward(encoder.m);
  fwd.phi1_subset = gather_rows(phi1_hat, fwd.subset);
  fwd.tau = sparsemax_rows(encoder_logits(prototypes, fwd.phi1_subset, encoder.gamma));
  fwd.tau_mean = fwd.tau.colwise().mean().transpose();

  const Index n_train = fwd.n_train;
  const Index n_test = static_cast<Index>(split.test.size());
  fwd.phi2_train = gather_rows(phi2, split.train);
  fwd.phi2_test = gather_rows(phi2, split.test);

  const Matrix targets_train = fwd.tau.topRows(n_train);
  const Matrix w2_init = Matrix::Zero(encoder.num_classes(), phi2.cols());
  fwd.trajectory = fit_probe(fwd.phi2_train, targets_train, config.probe_options(), w2_init);
  fwd.test_probs = probe_predict(fwd.trajectory.final_weights(), fwd.phi2_test);

  fwd.cross_entropy = soft_cross_entropy(fwd.test_probs, fwd.tau.bottomRows(n_test));
  fwd.entropy = entropy_regularizer(fwd.tau);
  fwd.loss = fwd.cross_entropy - config.eta * fwd.entropy;
  return fwd;
}

Matrix hypergradient(const OuterForward& fwd) {
  const Index n = fwd.tau.rows();
  const Index k = fwd.tau.cols();
  const Index n_train = fwd.n_train;
  const Index n_test = n - n_train;
  const double inv_test = 1.0 / static_cast<double>(n_test);

  Matrix tau_bar = Matrix::Zero(n, k);

  // Cross-entropy: direct dependence on the test targets.
  const Matrix test_targets = fwd.tau.bottomRows(n_test);
  constexpr double kTiny = std::numeric_limits<double>::min();
  tau_bar.bottomRows(n_test) = -inv_test * fwd.test_probs.array().max(kTiny).log().matrix();

  // Cross-entropy: dependence through the final probe weights.
  Matrix logits_bar = fwd.test_probs;
  logits_bar.array().colwise() *= test_targets.rowwise().sum().array();
  logits_bar -= test_targets;
  const Matrix w2_bar = inv_test * logits_bar.transpose() * fwd.phi2_test;
  tau_bar.topRows(n_train) += backprop_probe_targets(
      fwd.trajectory, fwd.phi2_train, fwd.tau.topRows(n_train), w2_bar);

  // -eta * entropy of the mean label distribution.
  if (fwd.eta != 0.0) {
    RowVector mean_bar = RowVector::Zero(k);
    for (Index c = 0; c < k; ++c) {
      if (fwd.tau_mean(c) > 0.0) {
        mean_bar(c) = fwd.eta * (std::log(fwd.tau_mean(c)) + 1.0) / static_cast<double>(n);
      }
    }
    tau_bar.rowwise() += mean_bar;
  }

  // Sparsemax, then the scaled cosine logits, then Gram-Schmidt.
  Matrix logits_grad(n, k);
  const auto width = static_cast<std::size_t>(k);
  for (Index i = 0; i < n; ++i) {
    sparsemax_backward(std::span(fwd.tau.row(i).data(), width),
                       std::span(tau_bar.row(i).data(), width),
                       std::span(logits_grad.row(i).data(), width));
  }
  const Matrix prototypes_grad = logits_grad.transpose() * fwd.phi1_subset / fwd.gamma;
  return fwd.gram_schmidt.backward(prototypes_grad);
}

// ---------------------------------------------------------------------------
// Optimizer

void adam_step(AdamState& state, Matrix& params, const Matrix& grad, double alpha) {
  if (state.step == 0) {
    state.first = Matrix::Zero(params.rows(), params.cols());
    state.second = Matrix::Zero(params.rows(), params.cols());
  }
  ++state.step;
  state.first = state.beta1 * state.first + (1.0 - state.beta1) * grad;
  state.second = state.beta2 * state.second + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double first_correction = 1.0 - std::pow(state.beta1, t);
  const double second_correction = 1.0 - std::pow(state.beta2, t);
  params.array() -= alpha * (state.first.array() / first_correction) /
                    ((state.second.array() / second_correction).sqrt() + state.epsilon);
}

double clip_gradient(Matrix& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / norm;
  return norm;
}

// ---------------------------------------------------------------------------
// Training loop

RunResult train_run(const Matrix& phi1_hat, const Matrix& phi2, const TrainConfig& config,
                    const TrainObserver& observer) {
  config.validate();
  if (phi1_hat.rows() != phi2.rows()) {
    raise(ErrorKind::kConfig, "representation spaces disagree on sample count (" +
                                  std::to_string(phi1_hat.rows()) + " vs " +
                                  std::to_string(phi2.rows()) + ")");
  }
  const auto n = static_cast<std::size_t>(phi1_hat.rows());
  if (config.subset_size > n) {
    raise(ErrorKind::kConfig, "subset size " + std::to_string(config.subset_size) +
                                  " exceeds dataset size " + std::to_string(n));
  }

  RunResult result;
  result.seed = config.seed;
  result.encoder = ortho_rand(config.num_classes, static_cast<int>(phi1_hat.cols()),
                              config.seed, config.gamma);
  result.objective_trace.reserve(static_cast<std::size_t>(config.iterations));

  auto log = logger();
  std::mt19937_64 split_rng = derive_rng(config.seed, kSplitStream);
  AdamState adam;
  double alpha = config.alpha;
  TaskEncoder& encoder = result.encoder;

  try {
    for (int iter = 0; iter < config.iterations; ++iter) {
      if (std::find(config.anneal_iters.begin(), config.anneal_iters.end(), iter) !=
          config.anneal_iters.end()) {
        alpha /= config.anneal_factor;
        encoder.gamma /= config.anneal_factor;
        log->debug("seed {} iteration {}: annealed alpha {} -> {}, gamma {} -> {}",
                   config.seed, iter, alpha * config.anneal_factor, alpha,
                   encoder.gamma * config.anneal_factor, encoder.gamma);
      }

      double loss = 0.0;
      Matrix grad = Matrix::Zero(encoder.m.rows(), encoder.m.cols());
      for (int s = 0; s < config.n_subsets; ++s) {
        const SplitIndices split =
            sample_splits(n, config.subset_size, config.train_fraction, split_rng);
        const OuterForward fwd = outer_loss(encoder, phi1_hat, phi2, split, config);
        loss += fwd.loss;
        grad += hypergradient(fwd);
      }
      loss /= config.n_subsets;
      grad /= static_cast<double>(config.n_subsets);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        raise(ErrorKind::kNumerical,
              "non-finite outer objective at iteration " + std::to_string(iter));
      }
      const double grad_norm = clip_gradient(grad, config.clip_norm);
      adam_step(adam, encoder.m, grad, alpha);
      result.objective_trace.push_back(loss);
      log->trace("seed {} iteration {}: loss {:.6f}, |grad| {:.3e}", config.seed, iter, loss,
                 grad_norm);
      if (observer) observer(iter, encoder, loss);
    }

    result.labeling = encode(encoder, phi1_hat);
    CrossValidationOptions cv;
    cv.folds = config.cv_folds;
    cv.subset_size = config.subset_size;
    cv.train_fraction = config.train_fraction;
    cv.probe = config.probe_options();
    std::mt19937_64 cv_rng = derive_rng(config.seed, kCrossValidationStream);
    result.cv_accuracy = cross_validation_accuracy(encoder, phi1_hat, phi2, cv, cv_rng);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumerical && e.kind() != ErrorKind::kDegenerate) throw;
    result.status = RunStatus::kFailed;
    result.failure = e.what();
    result.cv_accuracy = 0.0;
    log->warn("seed {} failed after {} iterations: {}", config.seed,
              result.objective_trace.size(), e.what());
  }
  result.final_alpha = alpha;
  result.final_gamma = encoder.gamma;
  log->info("seed {} finished: cv_accuracy {:.4f}, alpha {} -> {}, gamma {} -> {}",
            config.seed, result.cv_accuracy, config.alpha, alpha, config.gamma, encoder.gamma);
  return result;
}

RunResult train_run(const EmbeddingSpace& phi1, const EmbeddingSpace& phi2,
                    const TrainConfig& config, const TrainObserver& observer) {
  const Matrix phi1_hat =
      phi1.manifest.pre_normalized ? phi1.matrix : normalize_rows(phi1.matrix);
  if (config.normalize_phi2 && !phi2.manifest.pre_normalized) {
    return train_run(phi1_hat, normalize_rows(phi2.matrix), config, observer);
  }
  return train_run(phi1_hat, phi2.matrix, config, observer);
}

}  // namespace labelsearch
