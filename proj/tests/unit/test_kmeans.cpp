#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "labelsearch/errors.hpp"
#include "labelsearch/kmeans.hpp"

using namespace labelsearch;

TEST_CASE("kmeans") {
  std::mt19937_64 rng(1);
  Matrix blobs = testing::random_matrix(100, 2, rng, 0.2);
  HardLabels truth(100);
  for (Index i = 0; i < 100; ++i) {
    truth[static_cast<std::size_t>(i)] = i < 50 ? 0 : 1;
    blobs(i, 0) += i < 50 ? -5.0 : 5.0;
  }
  SUBCASE("two separated blobs are recovered") {
    KMeansOptions opts;
    opts.num_clusters = 2;
    opts.runs = 5;
    const KMeansReport report = kmeans(blobs, opts, truth);
    REQUIRE(report.mean_acc.has_value());
    CHECK(*report.mean_acc == 1.0);
    CHECK(*report.mean_ari == doctest::Approx(1.0));
    for (const auto& run : report.runs) CHECK(run.acc.value() == 1.0);
  }
  SUBCASE("one cluster per point has zero inertia") {
    const Matrix pts = testing::random_matrix(8, 3, rng);
    std::mt19937_64 local(2);
    const KMeansRun run = kmeans_once(pts, 8, 100, local);
    CHECK(run.inertia == doctest::Approx(0.0));
  }
  SUBCASE("fixed seed reproduces; best run has the lowest inertia") {
    KMeansOptions opts;
    opts.num_clusters = 4;
    opts.runs = 6;
    opts.seed = 3;
    const Matrix pts = testing::random_matrix(200, 3, rng);
    const KMeansReport a = kmeans(pts, opts);
    const KMeansReport b = kmeans(pts, opts);
    for (std::size_t r = 0; r < a.runs.size(); ++r) CHECK(a.runs[r].labels == b.runs[r].labels);
    CHECK_FALSE(a.mean_acc.has_value());
    for (const auto& run : a.runs) CHECK(a.runs[a.best_run].inertia <= run.inertia);
  }
  SUBCASE("more clusters than points") {
    std::mt19937_64 local(4);
    CHECK_THROWS_AS(kmeans_once(testing::random_matrix(3, 2, rng), 4, 10, local), Error);
  }
}
