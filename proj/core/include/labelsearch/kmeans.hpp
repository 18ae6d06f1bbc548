#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "labelsearch/types.hpp"

namespace labelsearch {

struct KMeansOptions {
  int num_clusters = 10;
  int runs = 100;
  int max_iterations = 300;
  std::uint64_t seed = 0;
};

struct KMeansRun {
  HardLabels labels;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;
  std::optional<double> acc;
  std::optional<double> ari;
};

struct KMeansReport {
  std::vector<KMeansRun> runs;
  std::optional<double> mean_acc;
  std::optional<double> mean_ari;
  std::size_t best_run = 0;  // lowest inertia
};

/// One Lloyd's run with k-means++ seeding. Stops at an assignment fixpoint or
/// after max_iterations. An emptied cluster is re-seeded at the point
/// farthest from its current centroid.
KMeansRun kmeans_once(const Matrix& points, int num_clusters, int max_iterations,
                      std::mt19937_64& rng);

/// `options.runs` independent runs from seed-derived streams. When `truth` is
/// given every run is scored with ACC and ARI and the means are reported.
KMeansReport kmeans(const Matrix& points, const KMeansOptions& options,
                    const std::optional<HardLabels>& truth = std::nullopt);

}  // namespace labelsearch
