#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "labelsearch/aggregation.hpp"
#include "labelsearch/meta_opt.hpp"
#include "labelsearch/synthetic.hpp"
#include "labelsearch/task_encoder.hpp"

namespace labelsearch {

/// {K, d1, gamma, M (row-major, flat), seed}
nlohmann::json encoder_to_json(const TaskEncoder& encoder);
TaskEncoder encoder_from_json(const nlohmann::json& doc);

nlohmann::json config_to_json(const TrainConfig& config);
/// Missing keys keep the values already in `base`.
TrainConfig config_from_json(const nlohmann::json& doc, TrainConfig base = {});

nlohmann::json synth_spec_to_json(const SynthSpec& spec);

/// CRC-32 of the compact dump, as 8 hex digits.
std::string config_hash(const nlohmann::json& config);

/// {config, config_hash, seed, status, failure?, cv_accuracy,
///  objective_trace, labels, encoder, final_alpha, final_gamma}
nlohmann::json run_to_json(const RunResult& run, const TrainConfig& config);
LabelingRun labeling_run_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace labelsearch
