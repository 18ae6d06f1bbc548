#include "labelsearch/serialization.hpp"

#include <cstdio>
#include <fstream>

#include <zlib.h>

#include "labelsearch/errors.hpp"

namespace labelsearch {

using nlohmann::json;

json encoder_to_json(const TaskEncoder& encoder) {
  const auto& m = encoder.m;
  return {{"K", m.rows()},
          {"d1", m.cols()},
          {"gamma", encoder.gamma},
          {"M", std::vector<double>(m.data(), m.data() + m.size())},
          {"seed", encoder.seed}};
}

TaskEncoder encoder_from_json(const json& doc) {
  try {
    TaskEncoder encoder;
    const auto k = doc.at("K").get<Index>();
    const auto d1 = doc.at("d1").get<Index>();
    const auto values = doc.at("M").get<std::vector<double>>();
    if (k < 1 || d1 < 1 || static_cast<Index>(values.size()) != k * d1) {
      raise(ErrorKind::kFormat, "encoder M has " + std::to_string(values.size()) +
                                    " entries for K=" + std::to_string(k) +
                                    ", d1=" + std::to_string(d1));
    }
    encoder.m = Eigen::Map<const Matrix>(values.data(), k, d1);
    encoder.gamma = doc.at("gamma").get<double>();
    encoder.seed = doc.at("seed").get<std::uint64_t>();
    return encoder;
  } catch (const json::exception& e) {
    raise(ErrorKind::kFormat, std::string("encoder JSON: ") + e.what());
  }
}

json config_to_json(const TrainConfig& c) {
  return {{"preset", c.preset},
          {"k", c.num_classes},
          {"iters", c.iterations},
          {"alpha", c.alpha},
          {"inner_steps", c.inner_steps},
          {"inner_lr", c.inner_lr},
          {"eta", c.eta},
          {"gamma", c.gamma},
          {"subset_size", c.subset_size},
          {"train_frac", c.train_fraction},
          {"n_subsets", c.n_subsets},
          {"clip_norm", c.clip_norm},
          {"anneal_at", c.anneal_iters},
          {"anneal_factor", c.anneal_factor},
          {"ridge", c.ridge},
          {"normalize_phi2", c.normalize_phi2},
          {"cv_folds", c.cv_folds},
          {"seed", c.seed}};
}

TrainConfig config_from_json(const json& doc, TrainConfig base) {
  if (!doc.is_object()) {
    raise(ErrorKind::kFormat, "config must be a JSON object");
  }
  auto take = [&doc](const char* key, auto& field) {
    if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    if (doc.contains("preset")) {
      base = preset_config(doc.at("preset").get<std::string>());
    }
    take("k", base.num_classes);
    take("iters", base.iterations);
    take("alpha", base.alpha);
    take("inner_steps", base.inner_steps);
    take("inner_lr", base.inner_lr);
    take("eta", base.eta);
    take("gamma", base.gamma);
    take("subset_size", base.subset_size);
    take("train_frac", base.train_fraction);
    take("n_subsets", base.n_subsets);
    take("clip_norm", base.clip_norm);
    take("anneal_at", base.anneal_iters);
    take("anneal_factor", base.anneal_factor);
    take("ridge", base.ridge);
    take("normalize_phi2", base.normalize_phi2);
    take("cv_folds", base.cv_folds);
    take("seed", base.seed);
  } catch (const json::exception& e) {
    raise(ErrorKind::kFormat, std::string("config JSON: ") + e.what());
  }
  return base;
}

json synth_spec_to_json(const SynthSpec& s) {
  return {{"n_samples", s.n_samples},
          {"k", s.num_classes},
          {"latent_dim", s.latent_dim},
          {"d1", s.d1},
          {"d2", s.d2},
          {"cluster_separation", s.cluster_separation},
          {"noise_sigma", s.noise_sigma},
          {"ambient_sigma", s.ambient_sigma},
          {"offset", s.offset},
          {"spurious", s.spurious},
          {"spurious_separation", s.spurious_separation},
          {"min_probe_accuracy", s.min_probe_accuracy},
          {"seed", s.seed}};
}

std::string config_hash(const json& config) {
  const std::string text = config.dump();
  const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(text.data()),
                           static_cast<uInt>(text.size()));
  char buffer[9];
  std::snprintf(buffer, sizeof buffer, "%08lx", static_cast<unsigned long>(crc));
  return buffer;
}

json run_to_json(const RunResult& run, const TrainConfig& config) {
  TrainConfig echoed = config;
  echoed.seed = run.seed;
  const json config_doc = config_to_json(echoed);
  json doc = {{"config", config_doc},
              {"config_hash", config_hash(config_doc)},
              {"seed", run.seed},
              {"status", run.ok() ? "ok" : "failed"},
              {"cv_accuracy", run.cv_accuracy},
              {"objective_trace", run.objective_trace},
              {"labels", run.labeling.hard},
              {"encoder", encoder_to_json(run.encoder)},
              {"final_alpha", run.final_alpha},
              {"final_gamma", run.final_gamma}};
  if (!run.ok()) doc["failure"] = run.failure;
  return doc;
}

LabelingRun labeling_run_from_json(const json& doc) {
  try {
    LabelingRun run;
    run.seed = doc.at("seed").get<std::uint64_t>();
    run.cv_accuracy = doc.at("cv_accuracy").get<double>();
    run.labels = doc.at("labels").get<HardLabels>();
    return run;
  } catch (const json::exception& e) {
    raise(ErrorKind::kFormat, std::string("run JSON: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << doc.dump(2) << '\n';
  if (!out) raise(ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace labelsearch
