#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace labelsearch {

// Rows are samples throughout, so row-major keeps each sample contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = std::ptrdiff_t;
using IndexList = std::vector<Index>;
using HardLabels = std::vector<int>;

}  // namespace labelsearch
