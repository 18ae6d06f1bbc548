#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "labelsearch/aggregation.hpp"
#include "labelsearch/errors.hpp"

using namespace labelsearch;

namespace {

HardLabels permuted(const HardLabels& labels, const std::vector<int>& perm) {
  HardLabels out = labels;
  for (int& v : out) v = perm[static_cast<std::size_t>(v)];
  return out;
}

HardLabels random_labels(std::size_t n, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, k - 1);
  HardLabels out(n);
  for (int& v : out) v = dist(rng);
  return out;
}

}  // namespace

TEST_CASE("reference run") {
  const std::vector<LabelingRun> runs{{5, 0.8, {0}}, {2, 0.9, {0}}, {1, 0.9, {0}}, {0, 0.7, {0}}};
  CHECK(reference_run(runs) == 2);
}

TEST_CASE("align_labelings") {
  std::mt19937_64 rng(1);
  const HardLabels base = random_labels(200, 4, rng);
  SUBCASE("a single run is unchanged") {
    const std::vector<LabelingRun> runs{{0, 0.5, base}};
    const auto aligned = align_labelings(runs, 4);
    CHECK(aligned.labels[0] == base);
    CHECK(aligned.reference == 0);
  }
  SUBCASE("planted permutations are undone") {
    const std::vector<LabelingRun> runs{{0, 0.9, base},
                                        {1, 0.8, permuted(base, {1, 0, 3, 2})},
                                        {2, 0.7, permuted(base, {3, 2, 1, 0})},
                                        {3, 0.6, permuted(base, {2, 3, 0, 1})}};
    const auto aligned = align_labelings(runs, 4);
    for (const auto& labels : aligned.labels) CHECK(labels == base);
  }
  SUBCASE("aligns to the best-scoring run") {
    const HardLabels other = permuted(base, {1, 2, 3, 0});
    const std::vector<LabelingRun> runs{{0, 0.1, base}, {1, 0.95, other}};
    const auto aligned = align_labelings(runs, 4);
    CHECK(aligned.reference == 1);
    CHECK(aligned.labels[0] == other);
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(align_labelings(std::vector<LabelingRun>{{0, 0.1, {0, 1}}, {1, 0.2, {0}}}, 2), Error);
    CHECK_THROWS_AS(align_labelings(std::vector<LabelingRun>{{0, 0.1, {0, 5}}}, 2), Error);
  }
}

TEST_CASE("majority_vote") {
  SUBCASE("identical runs") {
    const HardLabels l{0, 1, 2, 1};
    const std::vector<LabelingRun> runs{{0, 0.5, l}, {1, 0.6, l}, {2, 0.7, l}};
    const auto result = majority_vote(runs, align_labelings(runs, 3));
    CHECK(result.consensus == l);
    CHECK(result.reference_seed == 2);
    CHECK(result.votes.rowwise().sum().minCoeff() == 3);
  }
  SUBCASE("two against one") {
    const std::vector<LabelingRun> runs{
        {0, 0.9, {0, 0, 1, 1, 1, 0}}, {1, 0.8, {0, 0, 1, 1, 0, 0}}, {2, 0.7, {0, 0, 1, 1, 0, 1}}};
    const auto result = majority_vote(runs, align_labelings(runs, 2));
    CHECK(result.consensus == HardLabels{0, 0, 1, 1, 0, 0});
  }
  SUBCASE("vote ties go to the reference run") {
    const std::vector<LabelingRun> runs{{0, 0.9, {0, 0, 1, 1, 1}}, {1, 0.5, {0, 0, 1, 1, 0}}};
    const auto result = majority_vote(runs, align_labelings(runs, 2));
    CHECK(result.consensus[4] == 1);
  }
  SUBCASE("top_n of one is the reference labeling") {
    std::mt19937_64 rng(2);
    std::vector<LabelingRun> runs;
    for (std::uint64_t s = 0; s < 5; ++s) runs.push_back({s, 0.1 * static_cast<double>(s), random_labels(50, 3, rng)});
    const auto aligned = align_labelings(runs, 3);
    const auto result = majority_vote(runs, aligned, 1);
    CHECK(result.consensus == aligned.labels[aligned.reference]);
    CHECK(result.voting_seeds == std::vector<std::uint64_t>{4});
  }
}

TEST_CASE("cosine_knn") {
  Matrix pts(4, 2);
  pts << 1, 0, 0.8, 0.6, 0, 1, -1, 0;
  const auto nn = cosine_knn(pts, 2);
  CHECK(nn[0] == IndexList{1, 2});
  CHECK(nn[2] == IndexList{1, 0});
  // Equal similarities resolve to the lower index.
  CHECK(nn[3] == IndexList{2, 1});
}

TEST_CASE("select_reliable") {
  std::mt19937_64 rng(3);
  // Three well separated directions in phi1 with 30 samples each.
  Matrix phi1 = testing::random_matrix(90, 6, rng, 0.05);
  HardLabels truth(90);
  for (Index i = 0; i < 90; ++i) {
    truth[static_cast<std::size_t>(i)] = static_cast<int>(i / 30);
    phi1(i, i / 30) += 1.0;
  }
  SUBCASE("unanimous runs on separated clusters saturate both counts") {
    const std::vector<LabelingRun> runs{{0, 0.9, truth}, {1, 0.8, permuted(truth, {2, 0, 1})}};
    const auto set = select_reliable(runs, align_labelings(runs, 3), phi1, 5, 10);
    REQUIRE(set.per_class.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(set.per_class[static_cast<std::size_t>(k)].size() == 5);
      for (const auto& s : set.per_class[static_cast<std::size_t>(k)]) {
        CHECK(s.a_nn == 10);
        CHECK(s.a_tau == 2);
        CHECK(truth[static_cast<std::size_t>(s.index)] == k);
      }
    }
    CHECK(set.short_classes.empty());
  }
  SUBCASE("ranking is lexicographic in (A_nn, A_tau) and picks majority members") {
    HardLabels noisy = truth;
    noisy[0] = 1;  // run 2 disagrees on sample 0
    const std::vector<LabelingRun> runs{{0, 0.9, truth}, {1, 0.8, truth}, {2, 0.7, noisy}};
    const auto set = select_reliable(runs, align_labelings(runs, 3), phi1, 30, 10);
    const auto& c0 = set.per_class[0];
    REQUIRE(c0.size() == 30);
    for (std::size_t i = 1; i < c0.size(); ++i) {
      const bool ordered = c0[i - 1].a_nn > c0[i].a_nn ||
                           (c0[i - 1].a_nn == c0[i].a_nn && (c0[i - 1].a_tau > c0[i].a_tau ||
                            (c0[i - 1].a_tau == c0[i].a_tau && c0[i - 1].index < c0[i].index)));
      CHECK(ordered);
    }
    CHECK(c0.back().index == 0);  // the only sample with A_tau = 2
  }
  SUBCASE("classes smaller than N_k keep every member and are reported") {
    HardLabels skewed = truth;
    for (std::size_t i = 60; i < 87; ++i) skewed[i] = 1;  // class 2 keeps 3 samples
    const std::vector<LabelingRun> runs{{0, 0.9, skewed}};
    const auto set = select_reliable(runs, align_labelings(runs, 3), phi1, 10, 5);
    CHECK(set.per_class[2].size() == 3);
    CHECK(set.short_classes == std::vector<int>{2});
  }
}
