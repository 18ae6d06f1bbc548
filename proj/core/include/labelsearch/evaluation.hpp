#pragma once

#include <random>
#include <vector>

#include "labelsearch/inner_solver.hpp"
#include "labelsearch/task_encoder.hpp"
#include "labelsearch/types.hpp"

namespace labelsearch {

/// Minimum-cost assignment for a square cost matrix. Entry `i` of the result
/// is the column assigned to row `i`.
std::vector<int> hungarian_match(const Matrix& cost);

/// counts(p, t) = number of samples predicted p with truth t.
CountMatrix confusion_matrix(const HardLabels& pred, const HardLabels& truth, int num_classes);

/// Best agreement over relabelings of `pred`, found by matching on the
/// negated confusion counts.
double clustering_accuracy(const HardLabels& pred, const HardLabels& truth, int num_classes);

/// The permutation used by clustering_accuracy: perm[p] = truth class
/// matched to predicted class p.
std::vector<int> best_permutation(const HardLabels& pred, const HardLabels& truth,
                                  int num_classes);

/// Pair-counting adjusted Rand index. Labels may be arbitrary non-negative
/// integers. Throws a configuration error for fewer than two samples.
double adjusted_rand_index(const HardLabels& pred, const HardLabels& truth);

struct CrossValidationOptions {
  int folds = 20;
  std::size_t subset_size = 0;  // 0 means all samples
  double train_fraction = 0.9;
  ProbeOptions probe;
};

/// Mean over `folds` fresh splits of the agreement between argmax probe
/// predictions and the encoder's hard labels on the held-out side. The probe
/// is fit on phi2 of the train side against the encoder's soft labels.
double cross_validation_accuracy(const TaskEncoder& encoder, const Matrix& phi1_hat,
                                 const Matrix& phi2, const CrossValidationOptions& options,
                                 std::mt19937_64& rng);

/// Number of classes that receive at least `min_share` of the samples.
int effective_class_count(const HardLabels& labels, int num_classes, double min_share);

/// Pearson correlation of two equally sized samples.
double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace labelsearch
