#include "labelsearch/embeddings.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include "labelsearch/errors.hpp"
#include "labelsearch/logging.hpp"

namespace labelsearch {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Tolerance on stored unit rows; f32 storage limits what can be expected.
constexpr double kPreNormalizedTolerance = 1e-5;

std::uint32_t to_little_endian(std::uint32_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) |
           ((bits >> 8) & 0xFF00u) | (bits >> 24);
  }
  return bits;
}

std::vector<std::uint32_t> encode_f32(const Matrix& matrix) {
  std::vector<std::uint32_t> words(static_cast<std::size_t>(matrix.size()));
  const double* src = matrix.data();
  for (std::size_t i = 0; i < words.size(); ++i) {
    words[i] = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(src[i])));
  }
  return words;
}

template <typename T>
T required(const json& doc, const char* key, const fs::path& path) {
  if (!doc.contains(key)) {
    raise(ErrorKind::kFormat, "manifest " + path.string() + " lacks key '" + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    raise(ErrorKind::kFormat,
          "manifest " + path.string() + " key '" + key + "': " + e.what());
  }
}

}  // namespace

EmbeddingManifest parse_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    raise(ErrorKind::kIo, "cannot open manifest " + manifest_path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    raise(ErrorKind::kFormat, "manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    raise(ErrorKind::kFormat, "manifest " + manifest_path.string() + " is not an object");
  }

  EmbeddingManifest manifest;
  manifest.name = required<std::string>(doc, "name", manifest_path);
  const auto n = required<std::int64_t>(doc, "n_samples", manifest_path);
  const auto d = required<std::int64_t>(doc, "dim", manifest_path);
  if (n < 1 || d < 1) {
    raise(ErrorKind::kFormat, "manifest " + manifest_path.string() +
                                  " needs n_samples >= 1 and dim >= 1");
  }
  manifest.n_samples = static_cast<std::size_t>(n);
  manifest.dim = static_cast<std::size_t>(d);
  manifest.dtype = required<std::string>(doc, "dtype", manifest_path);
  if (manifest.dtype != "f32") {
    raise(ErrorKind::kFormat, "unsupported dtype '" + manifest.dtype + "'");
  }
  manifest.data_path = required<std::string>(doc, "data_path", manifest_path);
  manifest.pre_normalized = required<bool>(doc, "pre_normalized", manifest_path);
  if (doc.contains("labels_path") && !doc.at("labels_path").is_null()) {
    manifest.labels_path = required<std::string>(doc, "labels_path", manifest_path);
  }
  return manifest;
}

EmbeddingSpace load_space(const fs::path& manifest_path) {
  EmbeddingSpace space;
  space.manifest = parse_manifest(manifest_path);
  const auto& m = space.manifest;
  const fs::path data_file = manifest_path.parent_path() / m.data_path;

  std::error_code ec;
  const auto actual = fs::file_size(data_file, ec);
  if (ec) {
    raise(ErrorKind::kIo, "cannot stat " + data_file.string() + ": " + ec.message());
  }
  const std::uintmax_t expected = m.n_samples * m.dim * sizeof(float);
  if (actual != expected) {
    std::ostringstream msg;
    msg << data_file.string() << " holds " << actual << " bytes, manifest implies "
        << expected << " (" << m.n_samples << " x " << m.dim << " x 4)";
    raise(ErrorKind::kFormat, msg.str());
  }

  std::vector<std::uint32_t> words(m.n_samples * m.dim);
  std::ifstream in(data_file, std::ios::binary);
  if (!in.read(reinterpret_cast<char*>(words.data()),
               static_cast<std::streamsize>(expected))) {
    raise(ErrorKind::kIo, "short read from " + data_file.string());
  }

  space.matrix.resize(static_cast<Index>(m.n_samples), static_cast<Index>(m.dim));
  double* dst = space.matrix.data();
  for (std::size_t i = 0; i < words.size(); ++i) {
    const float value = std::bit_cast<float>(to_little_endian(words[i]));
    if (!std::isfinite(value)) {
      const std::size_t row = i / m.dim;
      raise(ErrorKind::kData, "non-finite value in " + data_file.string() + " at row " +
                                  std::to_string(row) + ", column " +
                                  std::to_string(i % m.dim));
    }
    dst[i] = static_cast<double>(value);
  }

  if (m.pre_normalized) {
    for (Index r = 0; r < space.matrix.rows(); ++r) {
      if (std::abs(space.matrix.row(r).norm() - 1.0) > kPreNormalizedTolerance) {
        raise(ErrorKind::kData, "space '" + m.name + "' is flagged pre_normalized but row " +
                                    std::to_string(r) + " is not unit norm");
      }
    }
  }

  const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(words.data()),
                           static_cast<uInt>(expected));
  logger()->info("loaded space '{}' ({} x {}) from {}, crc32={:08x}", m.name, m.n_samples,
                 m.dim, data_file.string(), crc);
  return space;
}

fs::path save_space(const EmbeddingSpace& space, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    raise(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }

  EmbeddingManifest manifest = space.manifest;
  manifest.n_samples = static_cast<std::size_t>(space.matrix.rows());
  manifest.dim = static_cast<std::size_t>(space.matrix.cols());
  manifest.dtype = "f32";
  if (manifest.data_path.empty()) {
    manifest.data_path = manifest.name + ".f32";
  }

  const auto words = encode_f32(space.matrix);
  const fs::path data_file = dir / manifest.data_path;
  {
    std::ofstream out(data_file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
    if (!out) {
      raise(ErrorKind::kIo, "failed writing " + data_file.string());
    }
  }

  json doc = {
      {"name", manifest.name},
      {"n_samples", manifest.n_samples},
      {"dim", manifest.dim},
      {"dtype", manifest.dtype},
      {"data_path", manifest.data_path},
      {"pre_normalized", manifest.pre_normalized},
  };
  if (manifest.labels_path) {
    doc["labels_path"] = *manifest.labels_path;
  }
  const fs::path manifest_path = dir / (manifest.name + ".json");
  std::ofstream out(manifest_path, std::ios::trunc);
  out << doc.dump(2) << '\n';
  if (!out) {
    raise(ErrorKind::kIo, "failed writing " + manifest_path.string());
  }
  return manifest_path;
}

Matrix normalize_rows(const Matrix& matrix) {
  Matrix out(matrix.rows(), matrix.cols());
  for (Index r = 0; r < matrix.rows(); ++r) {
    const double norm = matrix.row(r).norm();
    if (!(norm >= kMinRowNorm)) {
      raise(ErrorKind::kData, "row " + std::to_string(r) + " has norm below 1e-12");
    }
    out.row(r) = matrix.row(r) / norm;
  }
  return out;
}

EmbeddingSpace normalize_rows(const EmbeddingSpace& space) {
  EmbeddingSpace out;
  out.manifest = space.manifest;
  out.manifest.pre_normalized = true;
  out.matrix = normalize_rows(space.matrix);
  return out;
}

GroundTruthLabels load_labels(const fs::path& path, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorKind::kIo, "cannot open labels file " + path.string());
  }
  GroundTruthLabels truth;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::size_t consumed = 0;
    int value = 0;
    try {
      value = std::stoi(line, &consumed);
    } catch (const std::exception&) {
      raise(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) +
                                    ": not an integer");
    }
    if (value < 0) {
      raise(ErrorKind::kData, path.string() + ":" + std::to_string(line_no) +
                                  ": negative label");
    }
    max_label = std::max(max_label, value);
    truth.labels.push_back(value);
  }
  truth.num_classes = num_classes.value_or(max_label + 1);
  if (max_label >= truth.num_classes) {
    raise(ErrorKind::kData, "label " + std::to_string(max_label) + " out of range for K=" +
                                std::to_string(truth.num_classes));
  }
  return truth;
}

void save_labels(const HardLabels& labels, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  for (int label : labels) {
    out << label << '\n';
  }
  if (!out) {
    raise(ErrorKind::kIo, "failed writing " + path.string());
  }
}

std::optional<GroundTruthLabels> load_manifest_labels(const fs::path& manifest_path) {
  const auto manifest = parse_manifest(manifest_path);
  if (!manifest.labels_path) {
    return std::nullopt;
  }
  auto truth = load_labels(manifest_path.parent_path() / *manifest.labels_path);
  if (truth.labels.size() != manifest.n_samples) {
    raise(ErrorKind::kData, "labels file has " + std::to_string(truth.labels.size()) +
                                " entries for " + std::to_string(manifest.n_samples) +
                                " samples");
  }
  return truth;
}

std::uint32_t data_checksum(const EmbeddingSpace& space) {
  const auto words = encode_f32(space.matrix);
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(words.data()),
              static_cast<uInt>(words.size() * sizeof(std::uint32_t))));
}

}  // namespace labelsearch
