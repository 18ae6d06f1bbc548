#include "labelsearch/evaluation.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "labelsearch/errors.hpp"
#include "labelsearch/splits.hpp"

namespace labelsearch {

std::vector<int> hungarian_match(const Matrix& cost) {
  if (cost.rows() != cost.cols()) {
    raise(ErrorKind::kConfig, "hungarian_match needs a square cost matrix");
  }
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  if (!cost.allFinite()) {
    raise(ErrorKind::kData, "hungarian_match needs finite costs");
  }

  // Shortest augmenting paths with row/column potentials (1-based, column 0
  // is a sentinel).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match_col(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match_col[0] = row;
    int col0 = 0;
    std::vector<double> min_v(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int row0 = match_col[col0];
      double delta = kInf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double reduced = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (reduced < min_v[col]) {
          min_v[col] = reduced;
          way[col] = col0;
        }
        if (min_v[col] < delta) {
          delta = min_v[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match_col[col]] += delta;
          v[col] -= delta;
        } else {
          min_v[col] -= delta;
        }
      }
      col0 = col1;
    } while (match_col[col0] != 0);
    do {
      const int col1 = way[col0];
      match_col[col0] = match_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int col = 1; col <= n; ++col) {
    assignment[static_cast<std::size_t>(match_col[col] - 1)] = col - 1;
  }
  return assignment;
}

CountMatrix confusion_matrix(const HardLabels& pred, const HardLabels& truth, int num_classes) {
  if (pred.size() != truth.size()) {
    raise(ErrorKind::kConfig, "label vectors differ in length (" + std::to_string(pred.size()) +
                                  " vs " + std::to_string(truth.size()) + ")");
  }
  CountMatrix counts = CountMatrix::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= num_classes || truth[i] < 0 || truth[i] >= num_classes) {
      raise(ErrorKind::kData, "label out of range at sample " + std::to_string(i));
    }
    ++counts(pred[i], truth[i]);
  }
  return counts;
}

std::vector<int> best_permutation(const HardLabels& pred, const HardLabels& truth,
                                  int num_classes) {
  const CountMatrix counts = confusion_matrix(pred, truth, num_classes);
  return hungarian_match(-counts.cast<double>());
}

double clustering_accuracy(const HardLabels& pred, const HardLabels& truth, int num_classes) {
  if (pred.empty()) {
    raise(ErrorKind::kConfig, "clustering accuracy of an empty labeling");
  }
  const CountMatrix counts = confusion_matrix(pred, truth, num_classes);
  const auto perm = hungarian_match(-counts.cast<double>());
  std::int64_t matched = 0;
  for (int p = 0; p < num_classes; ++p) {
    matched += counts(p, perm[static_cast<std::size_t>(p)]);
  }
  return static_cast<double>(matched) / static_cast<double>(pred.size());
}

double adjusted_rand_index(const HardLabels& pred, const HardLabels& truth) {
  if (pred.size() != truth.size()) {
    raise(ErrorKind::kConfig, "label vectors differ in length");
  }
  if (pred.size() < 2) {
    raise(ErrorKind::kConfig, "adjusted Rand index is undefined for fewer than 2 samples");
  }
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> rows, cols;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++joint[{pred[i], truth[i]}];
    ++rows[pred[i]];
    ++cols[truth[i]];
  }
  auto pairs = [](std::int64_t c) { return 0.5 * static_cast<double>(c) * static_cast<double>(c - 1); };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  for (const auto& [key, c] : rows) sum_rows += pairs(c);
  for (const auto& [key, c] : cols) sum_cols += pairs(c);
  const double total = pairs(static_cast<std::int64_t>(pred.size()));
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) {
    // Both partitions trivial (all-in-one or all singletons) and identical.
    return 1.0;
  }
  return (index - expected) / (max_index - expected);
}

double cross_validation_accuracy(const TaskEncoder& encoder, const Matrix& phi1_hat,
                                 const Matrix& phi2, const CrossValidationOptions& options,
                                 std::mt19937_64& rng) {
  if (options.folds < 1) {
    raise(ErrorKind::kConfig, "cross validation needs at least one fold");
  }
  const auto n = static_cast<std::size_t>(phi1_hat.rows());
  const std::size_t subset = options.subset_size == 0 ? n : options.subset_size;
  const Labeling labeling = encode(encoder, phi1_hat);
  const Matrix w2_init = Matrix::Zero(encoder.num_classes(), phi2.cols());

  double total = 0.0;
  for (int fold = 0; fold < options.folds; ++fold) {
    const SplitIndices split = sample_splits(n, subset, options.train_fraction, rng);
    const InnerTrajectory fit = fit_probe(gather_rows(phi2, split.train),
                                          gather_rows(labeling.probs, split.train),
                                          options.probe, w2_init);
    const HardLabels predicted =
        argmax_rows(probe_predict(fit.final_weights(), gather_rows(phi2, split.test)));
    std::size_t agree = 0;
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      agree += predicted[i] == labeling.hard[static_cast<std::size_t>(split.test[i])];
    }
    total += static_cast<double>(agree) / static_cast<double>(split.test.size());
  }
  return total / options.folds;
}

int effective_class_count(const HardLabels& labels, int num_classes, double min_share) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  int effective = 0;
  for (std::size_t c : counts) {
    if (static_cast<double>(c) >= min_share * static_cast<double>(labels.size())) ++effective;
  }
  return effective;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    raise(ErrorKind::kConfig, "correlation needs two equally sized samples of size >= 2");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace labelsearch
