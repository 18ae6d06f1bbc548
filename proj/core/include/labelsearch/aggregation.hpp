#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "labelsearch/types.hpp"

namespace labelsearch {

/// The parts of a search run that aggregation consumes.
struct LabelingRun {
  std::uint64_t seed = 0;
  double cv_accuracy = 0.0;
  HardLabels labels;
};

struct AlignedLabelings {
  std::vector<HardLabels> labels;  // same order as the input runs
  std::size_t reference = 0;       // index of the highest-cv_accuracy run
  int num_classes = 0;
};

/// Index of the run with the highest cv_accuracy; ties go to the lower seed.
std::size_t reference_run(std::span<const LabelingRun> runs);

/// Relabels every run to agree as much as possible with the reference run.
/// Throws an input error if runs disagree on N or use labels >= K.
AlignedLabelings align_labelings(std::span<const LabelingRun> runs, int num_classes);

struct AggregateResult {
  HardLabels consensus;
  CountMatrix votes;  // N x K
  std::uint64_t reference_seed = 0;
  std::vector<std::uint64_t> voting_seeds;
};

/// Per-sample majority over aligned labelings. With top_n set, only the
/// top_n runs by cv_accuracy (ties to lower seed) vote. Vote ties resolve to
/// the reference run's label for that sample.
AggregateResult majority_vote(std::span<const LabelingRun> runs,
                              const AlignedLabelings& aligned,
                              std::optional<std::size_t> top_n = std::nullopt);

struct ReliableSample {
  Index index = 0;
  int a_nn = 0;   // neighbors sharing the sample's majority label
  int a_tau = 0;  // runs agreeing with the majority label
};

struct ReliableSet {
  std::vector<std::vector<ReliableSample>> per_class;
  std::size_t per_class_target = 0;
  int neighbors = 0;
  std::vector<int> short_classes;  // classes with fewer than N_k members
};

/// Exact k nearest neighbors by cosine similarity, self excluded. Rows of
/// `unit_rows` must be unit norm. Similarity ties go to the lower index.
std::vector<IndexList> cosine_knn(const Matrix& unit_rows, int k);

/// Balanced reliable-sample selection: majority labels over the aligned
/// runs, agreement counts A_tau and A_nn (over `neighbors` cosine neighbors
/// in phi1), then per class the top `per_class` samples in descending
/// (A_nn, A_tau) order, ties to the lower index.
ReliableSet select_reliable(std::span<const LabelingRun> runs,
                            const AlignedLabelings& aligned, const Matrix& phi1,
                            std::size_t per_class, int neighbors);

}  // namespace labelsearch
