#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "labelsearch/embeddings.hpp"
#include "labelsearch/inner_solver.hpp"
#include "labelsearch/splits.hpp"
#include "labelsearch/task_encoder.hpp"
#include "labelsearch/types.hpp"

namespace labelsearch {

/// Hyperparameters of one search run. Defaults are the 10000-sample setting
/// (9000 train / 1000 test per subset).
struct TrainConfig {
  int num_classes = 10;
  int iterations = 1000;
  double alpha = 1e-3;
  int inner_steps = 300;
  double inner_lr = 1e-3;
  double eta = 10.0;
  double gamma = 0.1;
  std::size_t subset_size = 10000;
  double train_fraction = 0.9;
  int n_subsets = 20;
  double clip_norm = 1.0;
  std::vector<int> anneal_iters{100, 200};
  double anneal_factor = 10.0;
  double ridge = 0.0;
  bool normalize_phi2 = false;
  int cv_folds = 20;
  std::uint64_t seed = 0;
  std::string preset = "default";

  ProbeOptions probe_options() const { return {inner_steps, inner_lr, ridge}; }

  /// Throws a configuration error describing the first invalid field.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Named presets: "default" (10000-sample subsets), "stl10-inductive"
/// (5000), "stl10-transductive" (8000), "imagenet" (20000 with a 14000/6000
/// split, both step sizes 0.1, 100 inner steps, no annealing) and
/// "synthetic" (desk-scale fixtures). Throws a configuration error for
/// unknown names.
TrainConfig preset_config(std::string_view name);
std::vector<std::string> preset_names();

/// Natural-log entropy of the column means of `rows`, with 0 log 0 = 0.
double entropy_regularizer(const Matrix& rows);

/// Everything the reverse pass needs from one outer-loss evaluation.
struct OuterForward {
  double loss = 0.0;
  double cross_entropy = 0.0;
  double entropy = 0.0;

  Index n_train = 0;
  IndexList subset;      // train indices followed by test indices
  GramSchmidt gram_schmidt;
  Matrix phi1_subset;    // n x d1
  Matrix phi2_train;     // n_train x d2
  Matrix phi2_test;      // n_test x d2
  Matrix tau;            // n x K sparsemax outputs
  Vector tau_mean;
  InnerTrajectory trajectory;
  Matrix test_probs;     // n_test x K
  double gamma = 0.0;
  double eta = 0.0;
};

/// CE(softmax(W2_hat phi2(X_te)), tau(X_te)) - eta * R(mean tau over
/// X_tr u X_te), with W2_hat from zero-initialized gradient descent on
/// (phi2(X_tr), tau(X_tr)).
OuterForward outer_loss(const TaskEncoder& encoder, const Matrix& phi1_hat,
                        const Matrix& phi2, const SplitIndices& split,
                        const TrainConfig& config);

/// Exact reverse-mode derivative of the cached outer loss with respect to
/// the encoder's unconstrained matrix M. Covers the inner trajectory, the
/// test targets and the entropy term.
Matrix hypergradient(const OuterForward& forward);

struct AdamState {
  Matrix first;
  Matrix second;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, Matrix& params, const Matrix& grad, double alpha);

/// Rescales `grad` so its Frobenius norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_gradient(Matrix& grad, double max_norm);

enum class RunStatus { kOk, kFailed };

struct RunResult {
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::kOk;
  std::string failure;  // diagnostics when status == kFailed
  TaskEncoder encoder;
  double cv_accuracy = 0.0;
  Labeling labeling;
  std::vector<double> objective_trace;
  double final_alpha = 0.0;
  double final_gamma = 0.0;

  bool ok() const { return status == RunStatus::kOk; }
};

/// Per-iteration hook: iteration index (0-based), the encoder after that
/// iteration's update and the subset-averaged loss before it.
using TrainObserver =
    std::function<void(int iteration, const TaskEncoder& encoder, double loss)>;

/// Runs the outer search loop. `phi1_hat` must have unit-norm rows; `phi2`
/// is used as given. Deterministic in config.seed. Divergence or a
/// rank-deficient encoder produces a failed RunResult rather than an
/// exception.
RunResult train_run(const Matrix& phi1_hat, const Matrix& phi2, const TrainConfig& config,
                    const TrainObserver& observer = {});

/// Convenience overload: normalizes phi1 (unless flagged pre-normalized) and
/// phi2 when config.normalize_phi2 is set.
RunResult train_run(const EmbeddingSpace& phi1, const EmbeddingSpace& phi2,
                    const TrainConfig& config, const TrainObserver& observer = {});

/// Independent RNG stream for `purpose` derived from a run seed.
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t purpose);

inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kCrossValidationStream = 2;

}  // namespace labelsearch
