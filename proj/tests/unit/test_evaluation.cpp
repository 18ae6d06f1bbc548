#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "labelsearch/errors.hpp"
#include "labelsearch/evaluation.hpp"
#include "labelsearch/meta_opt.hpp"
#include "oracles.hpp"

using namespace labelsearch;

namespace {

HardLabels random_labels(std::size_t n, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, k - 1);
  HardLabels out(n);
  for (int& v : out) v = dist(rng);
  return out;
}

std::vector<std::vector<double>> nested(const Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)].assign(m.row(i).data(), m.row(i).data() + m.cols());
  return out;
}

double assignment_cost(const Matrix& cost, const std::vector<int>& assign) {
  double total = 0.0;
  for (std::size_t i = 0; i < assign.size(); ++i) total += cost(static_cast<Index>(i), assign[i]);
  return total;
}

}  // namespace

TEST_CASE("hungarian_match") {
  SUBCASE("identity and reversal") {
    Matrix eye = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
    CHECK(hungarian_match(eye) == std::vector<int>{0, 1, 2, 3});
    Matrix rev = Matrix::Ones(4, 4);
    for (int i = 0; i < 4; ++i) rev(i, 3 - i) = 0.0;
    CHECK(hungarian_match(rev) == std::vector<int>{3, 2, 1, 0});
  }
  SUBCASE("matches exhaustive search") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uniform(-5.0, 5.0);
    std::uniform_int_distribution<int> integer(0, 3);
    for (int trial = 0; trial < 1000; ++trial) {
      const Index k = 1 + trial % 6;
      Matrix cost(k, k);
      // Half the cases use small integers to force ties.
      for (Index i = 0; i < cost.size(); ++i) cost.data()[i] = trial % 2 ? uniform(rng) : integer(rng);
      const auto assign = hungarian_match(cost);
      std::vector<int> sorted = assign;
      std::sort(sorted.begin(), sorted.end());
      std::vector<int> identity(static_cast<std::size_t>(k));
      std::iota(identity.begin(), identity.end(), 0);
      CHECK(sorted == identity);
      CHECK(std::abs(assignment_cost(cost, assign) - oracle::min_assignment_cost(nested(cost))) <= 1e-9);
    }
  }
}

TEST_CASE("clustering accuracy") {
  CHECK(clustering_accuracy({0, 0, 1, 1}, {0, 1, 0, 1}, 2) == 0.5);
  CHECK(clustering_accuracy({1, 1, 0, 0}, {0, 0, 1, 1}, 2) == 1.0);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 5;
    const HardLabels truth = random_labels(40, k, rng);
    HardLabels pred = random_labels(40, k, rng);
    const double acc = clustering_accuracy(pred, truth, k);
    CHECK(std::abs(acc - oracle::accuracy_brute_force(pred, truth, k)) <= 1e-12);
    // Relabeling the predictions does not change the score.
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int& p : pred) p = perm[static_cast<std::size_t>(p)];
    CHECK(clustering_accuracy(pred, truth, k) == acc);
  }
  const CountMatrix counts = confusion_matrix({0, 1, 1}, {1, 1, 0}, 2);
  CHECK(counts(0, 1) == 1);
  CHECK(counts(1, 1) == 1);
  CHECK(counts(1, 0) == 1);
}

TEST_CASE("adjusted rand index") {
  CHECK(adjusted_rand_index({0, 0, 1, 1, 2}, {4, 4, 7, 7, 1}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({0, 0, 0, 0}, {0, 1, 0, 1}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(adjusted_rand_index({0}, {0}), Error);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const HardLabels a = random_labels(20, 2 + trial % 4, rng);
    const HardLabels b = random_labels(20, 2 + trial % 3, rng);
    const double ari = adjusted_rand_index(a, b);
    CHECK(std::abs(ari - oracle::ari_pairs(a, b)) <= 1e-12);
    CHECK(ari == doctest::Approx(adjusted_rand_index(b, a)).epsilon(1e-14));
  }
}

TEST_CASE("cross_validation_accuracy") {
  std::mt19937_64 data_rng(4);
  Matrix phi1 = testing::random_matrix(400, 6, data_rng);
  phi1 = phi1.array().colwise() / phi1.rowwise().norm().array();
  const Matrix noise = testing::random_matrix(400, 6, data_rng);
  const TaskEncoder enc = ortho_rand(4, 6, 1, 0.1);
  CrossValidationOptions opts;
  opts.folds = 5;
  opts.probe = {100, 0.5, 0.0};

  SUBCASE("deterministic given the generator") {
    std::mt19937_64 a(7), b(7);
    CHECK(cross_validation_accuracy(enc, phi1, noise, opts, a) ==
          cross_validation_accuracy(enc, phi1, noise, opts, b));
  }
  SUBCASE("single fold equals a manual split") {
    opts.folds = 1;
    std::mt19937_64 rng(8), manual_rng(8);
    const double cv = cross_validation_accuracy(enc, phi1, noise, opts, rng);
    const SplitIndices split = sample_splits(400, 400, opts.train_fraction, manual_rng);
    const Labeling lab = encode(enc, phi1);
    const auto traj = fit_probe(gather_rows(noise, split.train), gather_rows(lab.probs, split.train),
                                opts.probe, Matrix::Zero(4, 6));
    const HardLabels pred = argmax_rows(probe_predict(traj.final_weights(), gather_rows(noise, split.test)));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == lab.hard[static_cast<std::size_t>(split.test[i])];
    CHECK(cv == static_cast<double>(hits) / static_cast<double>(pred.size()));
  }
  SUBCASE("labels unrelated to phi2 score near chance") {
    // Balanced labels from a random encoder, independent noise in phi2.
    std::mt19937_64 rng(9);
    opts.folds = 20;
    const double cv = cross_validation_accuracy(enc, phi1, noise, opts, rng);
    CHECK(cv > 0.25 - 0.1);
    CHECK(cv < 0.25 + 0.1);
  }
  SUBCASE("phi2 equal to phi1 makes the labels learnable") {
    std::mt19937_64 rng(10);
    CHECK(cross_validation_accuracy(enc, phi1, phi1, opts, rng) > 0.8);
  }
}

TEST_CASE("effective classes and correlation") {
  CHECK(effective_class_count({0, 0, 0, 1, 2, 2}, 4, 0.2) == 2);
  CHECK(effective_class_count({0, 1, 2, 3}, 4, 0.05) == 4);
  CHECK(pearson_correlation({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson_correlation({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson_correlation({1, 2, 3, 4}, {1, -1, -1, 1}) == doctest::Approx(0.0));
}
