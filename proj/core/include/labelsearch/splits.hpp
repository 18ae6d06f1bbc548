#pragma once

#include <cstddef>
#include <random>

#include "labelsearch/types.hpp"

namespace labelsearch {

struct SplitIndices {
  IndexList train;
  IndexList test;
};

/// Draws `subset_size` distinct indices from [0, n) and assigns the first
/// round(subset_size * train_fraction) of them to the train side. Both sides
/// are non-empty. Throws a configuration error if subset_size > n.
SplitIndices sample_splits(std::size_t n, std::size_t subset_size, double train_fraction,
                           std::mt19937_64& rng);

/// Rows of `matrix` at `indices`, in order.
Matrix gather_rows(const Matrix& matrix, const IndexList& indices);

}  // namespace labelsearch
