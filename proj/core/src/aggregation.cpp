#include "labelsearch/aggregation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "labelsearch/embeddings.hpp"
#include "labelsearch/errors.hpp"
#include "labelsearch/evaluation.hpp"
#include "labelsearch/logging.hpp"

namespace labelsearch {
namespace {

bool ranks_before(const LabelingRun& a, const LabelingRun& b) {
  if (a.cv_accuracy != b.cv_accuracy) return a.cv_accuracy > b.cv_accuracy;
  return a.seed < b.seed;
}

}  // namespace

std::size_t reference_run(std::span<const LabelingRun> runs) {
  if (runs.empty()) {
    raise(ErrorKind::kConfig, "no runs to aggregate");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (ranks_before(runs[i], runs[best])) best = i;
  }
  return best;
}

AlignedLabelings align_labelings(std::span<const LabelingRun> runs, int num_classes) {
  AlignedLabelings aligned;
  aligned.reference = reference_run(runs);
  aligned.num_classes = num_classes;
  const HardLabels& ref = runs[aligned.reference].labels;
  for (const auto& run : runs) {
    if (run.labels.size() != ref.size()) {
      raise(ErrorKind::kData, "run " + std::to_string(run.seed) + " labels " +
                                  std::to_string(run.labels.size()) + " samples, expected " +
                                  std::to_string(ref.size()));
    }
    const auto perm = best_permutation(run.labels, ref, num_classes);
    HardLabels relabeled(run.labels.size());
    for (std::size_t i = 0; i < relabeled.size(); ++i) {
      relabeled[i] = perm[static_cast<std::size_t>(run.labels[i])];
    }
    aligned.labels.push_back(std::move(relabeled));
  }
  return aligned;
}

AggregateResult majority_vote(std::span<const LabelingRun> runs,
                              const AlignedLabelings& aligned,
                              std::optional<std::size_t> top_n) {
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(runs[a], runs[b]);
  });
  if (top_n) {
    if (*top_n == 0) raise(ErrorKind::kConfig, "top_n must be at least 1");
    order.resize(std::min(order.size(), *top_n));
  }

  const HardLabels& ref = aligned.labels[aligned.reference];
  const auto n = static_cast<Index>(ref.size());
  const int k = aligned.num_classes;

  AggregateResult result;
  result.reference_seed = runs[aligned.reference].seed;
  result.votes = CountMatrix::Zero(n, k);
  for (std::size_t r : order) {
    result.voting_seeds.push_back(runs[r].seed);
    const HardLabels& labels = aligned.labels[r];
    for (Index i = 0; i < n; ++i) ++result.votes(i, labels[static_cast<std::size_t>(i)]);
  }

  result.consensus.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto row = result.votes.row(i);
    const std::int64_t top = row.maxCoeff();
    int winner = -1;
    int tied = 0;
    for (int c = 0; c < k; ++c) {
      if (row(c) == top) {
        if (winner < 0) winner = c;
        ++tied;
      }
    }
    const int ref_label = ref[static_cast<std::size_t>(i)];
    if (tied > 1 && row(ref_label) == top) winner = ref_label;
    result.consensus[static_cast<std::size_t>(i)] = winner;
  }
  return result;
}

std::vector<IndexList> cosine_knn(const Matrix& unit_rows, int k) {
  const Index n = unit_rows.rows();
  if (k < 0 || k >= n) {
    raise(ErrorKind::kConfig, "neighbor count must be in [0, N), got " + std::to_string(k));
  }
  std::vector<IndexList> neighbors(static_cast<std::size_t>(n));
  constexpr Index kBlock = 256;
  IndexList candidates(static_cast<std::size_t>(n - 1));
  for (Index start = 0; start < n; start += kBlock) {
    const Index rows = std::min(kBlock, n - start);
    const Matrix sims = unit_rows.middleRows(start, rows) * unit_rows.transpose();
    for (Index r = 0; r < rows; ++r) {
      const Index self = start + r;
      std::size_t slot = 0;
      for (Index j = 0; j < n; ++j) {
        if (j != self) candidates[slot++] = j;
      }
      auto closer = [&](Index a, Index b) {
        const double sa = sims(r, a), sb = sims(r, b);
        return sa != sb ? sa > sb : a < b;
      };
      std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), closer);
      neighbors[static_cast<std::size_t>(self)].assign(candidates.begin(),
                                                       candidates.begin() + k);
    }
  }
  return neighbors;
}

ReliableSet select_reliable(std::span<const LabelingRun> runs,
                            const AlignedLabelings& aligned, const Matrix& phi1,
                            std::size_t per_class, int neighbors) {
  const AggregateResult vote = majority_vote(runs, aligned);
  const HardLabels& majority = vote.consensus;
  const auto n = static_cast<Index>(majority.size());
  if (phi1.rows() != n) {
    raise(ErrorKind::kData, "phi1 has " + std::to_string(phi1.rows()) + " rows, labelings have " +
                                std::to_string(n));
  }

  std::vector<int> a_tau(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    a_tau[static_cast<std::size_t>(i)] =
        static_cast<int>(vote.votes(i, majority[static_cast<std::size_t>(i)]));
  }

  const auto knn = cosine_knn(normalize_rows(phi1), neighbors);
  std::vector<int> a_nn(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    const int label = majority[static_cast<std::size_t>(i)];
    for (Index j : knn[static_cast<std::size_t>(i)]) {
      a_nn[static_cast<std::size_t>(i)] += majority[static_cast<std::size_t>(j)] == label;
    }
  }

  ReliableSet set;
  set.per_class_target = per_class;
  set.neighbors = neighbors;
  set.per_class.resize(static_cast<std::size_t>(aligned.num_classes));
  for (Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    set.per_class[static_cast<std::size_t>(majority[u])].push_back({i, a_nn[u], a_tau[u]});
  }
  for (std::size_t c = 0; c < set.per_class.size(); ++c) {
    auto& members = set.per_class[c];
    std::sort(members.begin(), members.end(), [](const ReliableSample& a, const ReliableSample& b) {
      if (a.a_nn != b.a_nn) return a.a_nn > b.a_nn;
      if (a.a_tau != b.a_tau) return a.a_tau > b.a_tau;
      return a.index < b.index;
    });
    if (members.size() < per_class) {
      set.short_classes.push_back(static_cast<int>(c));
      logger()->warn("class {} has only {} members, {} requested", c, members.size(), per_class);
    } else {
      members.resize(per_class);
    }
  }
  return set;
}

}  // namespace labelsearch
