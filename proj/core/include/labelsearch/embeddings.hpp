#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "labelsearch/types.hpp"

namespace labelsearch {

/// Describes one frozen representation space stored on disk as a JSON
/// manifest next to a headerless little-endian f32 row-major matrix.
struct EmbeddingManifest {
  std::string name;
  std::size_t n_samples = 0;
  std::size_t dim = 0;
  std::string dtype = "f32";
  std::string data_path;  // relative to the manifest's directory
  bool pre_normalized = false;
  std::optional<std::string> labels_path;

  bool operator==(const EmbeddingManifest&) const = default;
};

/// An immutable N x d feature matrix. Values are held in double precision;
/// anything read from an f32 file converts back to f32 exactly.
struct EmbeddingSpace {
  EmbeddingManifest manifest;
  Matrix matrix;

  Index size() const { return matrix.rows(); }
  Index dim() const { return matrix.cols(); }
};

/// Ground-truth class indices in {0..K-1}. Only the evaluation side reads
/// these; nothing on the training path accepts them.
struct GroundTruthLabels {
  HardLabels labels;
  int num_classes = 0;
};

/// Smallest row norm accepted by normalize_rows.
inline constexpr double kMinRowNorm = 1e-12;

EmbeddingManifest parse_manifest(const std::filesystem::path& manifest_path);

EmbeddingSpace load_space(const std::filesystem::path& manifest_path);

/// Writes `<dir>/<name>.json` and `<dir>/<name>.f32` and returns the
/// manifest path. The matrix is narrowed to f32.
std::filesystem::path save_space(const EmbeddingSpace& space,
                                 const std::filesystem::path& dir);

/// Divides every row by its L2 norm. Throws a data error naming the first
/// row whose norm is below kMinRowNorm.
EmbeddingSpace normalize_rows(const EmbeddingSpace& space);
Matrix normalize_rows(const Matrix& matrix);

/// Newline-delimited integers. When num_classes is omitted it is inferred as
/// max(label) + 1.
GroundTruthLabels load_labels(const std::filesystem::path& path,
                              std::optional<int> num_classes = std::nullopt);
void save_labels(const HardLabels& labels, const std::filesystem::path& path);

/// Labels referenced by the manifest's optional `labels_path`, if any.
std::optional<GroundTruthLabels> load_manifest_labels(
    const std::filesystem::path& manifest_path);

/// CRC-32 of the raw matrix bytes as stored on disk (f32, little-endian).
std::uint32_t data_checksum(const EmbeddingSpace& space);

}  // namespace labelsearch
