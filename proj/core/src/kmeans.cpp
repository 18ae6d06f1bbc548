#include "labelsearch/kmeans.hpp"

#include <limits>
#include <string>

#include "labelsearch/errors.hpp"
#include "labelsearch/evaluation.hpp"
#include "labelsearch/meta_opt.hpp"

namespace labelsearch {
namespace {

Matrix plus_plus_seeds(const Matrix& points, int k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));

  Vector closest = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> draw(0.0, total);
      double target = draw(rng);
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= closest(i);
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    centroids.row(c) = points.row(chosen);
    closest = closest.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

KMeansRun kmeans_once(const Matrix& points, int num_clusters, int max_iterations,
                      std::mt19937_64& rng) {
  const Index n = points.rows();
  if (num_clusters < 1 || num_clusters > n) {
    raise(ErrorKind::kConfig, "k-means needs 1 <= K <= N, got K=" +
                                  std::to_string(num_clusters) + ", N=" + std::to_string(n));
  }
  KMeansRun run;
  run.centroids = plus_plus_seeds(points, num_clusters, rng);
  run.labels.assign(static_cast<std::size_t>(n), -1);
  Vector distance(n);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < num_clusters; ++c) {
        const double d = (points.row(i) - run.centroids.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      distance(i) = best;
      auto& label = run.labels[static_cast<std::size_t>(i)];
      if (label != best_c) {
        label = best_c;
        changed = true;
      }
    }
    run.iterations = iter + 1;
    if (!changed) break;

    Matrix sums = Matrix::Zero(num_clusters, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(num_clusters), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = run.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < num_clusters; ++c) {
      const Index count = counts[static_cast<std::size_t>(c)];
      if (count > 0) {
        run.centroids.row(c) = sums.row(c) / static_cast<double>(count);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid,
      // and stop that point from being chosen twice.
      Index farthest = 0;
      distance.maxCoeff(&farthest);
      run.centroids.row(c) = points.row(farthest);
      distance(farthest) = 0.0;
      run.labels[static_cast<std::size_t>(farthest)] = -1;
    }
  }

  run.inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    auto& label = run.labels[static_cast<std::size_t>(i)];
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < num_clusters; ++c) {
      const double d = (points.row(i) - run.centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        label = c;
      }
    }
    run.inertia += best;
  }
  return run;
}

KMeansReport kmeans(const Matrix& points, const KMeansOptions& options,
                    const std::optional<HardLabels>& truth) {
  if (options.runs < 1) {
    raise(ErrorKind::kConfig, "k-means needs at least one run");
  }
  KMeansReport report;
  double acc_sum = 0.0, ari_sum = 0.0;
  for (int r = 0; r < options.runs; ++r) {
    std::mt19937_64 rng = derive_rng(options.seed, 0x6b6d0000u + static_cast<std::uint64_t>(r));
    KMeansRun run = kmeans_once(points, options.num_clusters, options.max_iterations, rng);
    if (truth) {
      run.acc = clustering_accuracy(run.labels, *truth, options.num_clusters);
      run.ari = adjusted_rand_index(run.labels, *truth);
      acc_sum += *run.acc;
      ari_sum += *run.ari;
    }
    if (report.runs.empty() || run.inertia < report.runs[report.best_run].inertia) {
      report.best_run = report.runs.size();
    }
    report.runs.push_back(std::move(run));
  }
  if (truth) {
    report.mean_acc = acc_sum / options.runs;
    report.mean_ari = ari_sum / options.runs;
  }
  return report;
}

}  // namespace labelsearch
