#include "labelsearch/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "labelsearch/aggregation.hpp"
#include "labelsearch/embeddings.hpp"
#include "labelsearch/errors.hpp"
#include "labelsearch/evaluation.hpp"
#include "labelsearch/kmeans.hpp"
#include "labelsearch/meta_opt.hpp"
#include "labelsearch/serialization.hpp"
#include "labelsearch/synthetic.hpp"

namespace labelsearch::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Shortest decimal that reads back to the same double.
std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

std::string fixed(double value, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << value;
  return s.str();
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty() || text == "none") return out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      raise(ErrorKind::kConfig, "expected a comma-separated integer list, got '" + text + "'");
    }
    out.push_back(value);
  }
  return out;
}

json with_hash(json doc) {
  doc["config_hash"] = config_hash(doc.at("config"));
  return doc;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

json space_summary(const EmbeddingSpace& space) {
  return {{"name", space.manifest.name},
          {"n_samples", space.size()},
          {"dim", space.dim()},
          {"crc32", data_checksum(space)}};
}

// ---------------------------------------------------------------------------
// Train configuration shared by train and sweep.

struct TrainFlags {
  std::string phi1;
  std::string phi2;
  std::string config_file;
  std::string preset;
  std::string anneal_at;
  CLI::Option* anneal_option = nullptr;
  TrainConfig values;
  std::vector<std::pair<CLI::Option*, std::function<void(TrainConfig&)>>> overrides;

  template <typename T>
  void bind(CLI::App* app, const std::string& name, T TrainConfig::*field,
            const std::string& help) {
    CLI::Option* option = app->add_option(name, values.*field, help);
    overrides.emplace_back(option, [this, field](TrainConfig& c) { c.*field = values.*field; });
  }

  void attach(CLI::App* app) {
    app->add_option("--phi1", phi1, "Manifest of the space the labels are read from")
        ->required();
    app->add_option("--phi2", phi2, "Manifest of the space the probe is fit in")->required();
    app->add_option("--config", config_file, "JSON config file; flags override its values");
    app->add_option("--preset", preset, "Named hyperparameter preset");
    bind(app, "--k", &TrainConfig::num_classes, "Number of classes K");
    bind(app, "--iters", &TrainConfig::iterations, "Outer iterations");
    bind(app, "--alpha", &TrainConfig::alpha, "Outer step size");
    bind(app, "--inner-steps", &TrainConfig::inner_steps, "Inner gradient steps m");
    bind(app, "--inner-lr", &TrainConfig::inner_lr, "Inner step size");
    bind(app, "--eta", &TrainConfig::eta, "Entropy regularization weight");
    bind(app, "--gamma", &TrainConfig::gamma, "Sparsemax temperature");
    bind(app, "--subset-size", &TrainConfig::subset_size, "Samples per split pair");
    bind(app, "--train-frac", &TrainConfig::train_fraction, "Train share of each subset");
    bind(app, "--n-subsets", &TrainConfig::n_subsets, "Split pairs averaged per iteration");
    bind(app, "--clip-norm", &TrainConfig::clip_norm, "Gradient norm bound");
    bind(app, "--anneal-factor", &TrainConfig::anneal_factor, "Divisor applied to alpha and gamma");
    bind(app, "--ridge", &TrainConfig::ridge, "Inner ridge weight");
    bind(app, "--normalize-phi2", &TrainConfig::normalize_phi2, "L2-normalize phi2 rows");
    bind(app, "--cv-folds", &TrainConfig::cv_folds, "Cross-validation folds");
    anneal_option = app->add_option("--anneal-at", anneal_at,
                                    "Comma-separated iterations to anneal at, or 'none'");
  }

  TrainConfig resolve() const {
    TrainConfig config = preset_config(preset.empty() ? "default" : preset);
    if (!config_file.empty()) {
      json doc = read_json(config_file);
      if (!preset.empty() && doc.is_object()) doc.erase("preset");
      config = config_from_json(doc, config);
    }
    for (const auto& [option, apply] : overrides) {
      if (option->count() > 0) apply(config);
    }
    if (anneal_option->count() > 0) config.anneal_iters = parse_int_list(anneal_at);
    return config;
  }
};

struct Inputs {
  EmbeddingSpace phi1;
  EmbeddingSpace phi2;
};

Inputs load_inputs(const std::string& phi1_path, const std::string& phi2_path) {
  Inputs in{load_space(phi1_path), load_space(phi2_path)};
  if (in.phi1.size() != in.phi2.size()) {
    raise(ErrorKind::kData, "phi1 has " + std::to_string(in.phi1.size()) + " rows but phi2 has " +
                                std::to_string(in.phi2.size()));
  }
  return in;
}

json run_document(const RunResult& run, const TrainConfig& config, const Inputs& in) {
  json doc = run_to_json(run, config);
  doc["inputs"] = {{"phi1", space_summary(in.phi1)}, {"phi2", space_summary(in.phi2)}};
  return doc;
}

// ---------------------------------------------------------------------------
// Run directories and label files.

std::vector<json> load_runs(const fs::path& dir, std::ostream& err) {
  if (!fs::is_directory(dir)) raise(ErrorKind::kIo, dir.string() + " is not a directory");
  std::vector<json> runs;
  std::size_t failed = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || !name.starts_with("run_") || !name.ends_with(".json")) continue;
    json doc = read_json(entry.path());
    if (doc.value("status", "ok") != "ok") {
      ++failed;
      continue;
    }
    runs.push_back(std::move(doc));
  }
  if (failed > 0) err << "note: skipped " << failed << " failed run(s) in " << dir.string() << '\n';
  if (runs.empty()) raise(ErrorKind::kData, "no successful run_*.json files in " + dir.string());
  std::sort(runs.begin(), runs.end(), [](const json& a, const json& b) {
    return a.at("seed").get<std::uint64_t>() < b.at("seed").get<std::uint64_t>();
  });
  return runs;
}

std::vector<LabelingRun> labeling_runs(const std::vector<json>& docs) {
  std::vector<LabelingRun> runs;
  runs.reserve(docs.size());
  for (const auto& doc : docs) runs.push_back(labeling_run_from_json(doc));
  return runs;
}

int classes_of(const std::vector<json>& runs, int flag_value) {
  if (flag_value > 0) return flag_value;
  try {
    return runs.front().at("config").at("k").get<int>();
  } catch (const json::exception&) {
    raise(ErrorKind::kFormat, "run JSON lacks config.k; pass --k");
  }
}

// Text labels, or a run / aggregate JSON.
HardLabels load_predictions(const fs::path& path) {
  if (path.extension() == ".json") {
    const json doc = read_json(path);
    try {
      if (doc.contains("consensus")) return doc.at("consensus").get<HardLabels>();
      return doc.at("labels").get<HardLabels>();
    } catch (const json::exception& e) {
      raise(ErrorKind::kFormat, path.string() + ": " + e.what());
    }
  }
  return load_labels(path).labels;
}

GroundTruthLabels load_truth(const std::string& truth, const std::string& manifest) {
  if (!truth.empty()) return load_labels(truth);
  if (!manifest.empty()) {
    if (auto labels = load_manifest_labels(manifest)) return *labels;
    raise(ErrorKind::kConfig, manifest + " has no labels_path; pass --truth");
  }
  raise(ErrorKind::kConfig, "ground truth needed: pass --truth or a --phi1 manifest with labels");
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) raise(ErrorKind::kIo, "failed writing " + path.string());
}

void write_output(const json& doc, const std::string& path) {
  const fs::path target(path);
  ensure_parent(target);
  write_json(doc, target);
}

// ---------------------------------------------------------------------------
// Subcommands.

struct SynthFlags {
  SynthSpec spec;
  std::string out;
};

int run_synth(const SynthFlags& flags, std::ostream& out) {
  const SynthData data = generate(flags.spec);
  const fs::path dir(flags.out);
  fs::create_directories(dir);
  save_labels(data.truth.labels, dir / "labels.txt");
  EmbeddingSpace phi1 = data.phi1;
  EmbeddingSpace phi2 = data.phi2;
  phi1.manifest.labels_path = "labels.txt";
  phi2.manifest.labels_path = "labels.txt";
  save_space(phi1, dir);
  save_space(phi2, dir);
  json diagnostics = {{"attempts", data.diagnostics.attempts},
                      {"planted_probe_phi1", data.diagnostics.planted_phi1},
                      {"planted_probe_phi2", data.diagnostics.planted_phi2}};
  if (data.spurious) {
    save_labels(data.spurious->labels, dir / "spurious_labels.txt");
    diagnostics["spurious_probe_phi1"] = *data.diagnostics.spurious_phi1;
    diagnostics["spurious_probe_phi2_heldout"] = *data.diagnostics.spurious_phi2_heldout;
  }
  const json doc = with_hash({{"command", "synth"},
                              {"config", synth_spec_to_json(flags.spec)},
                              {"diagnostics", diagnostics}});
  write_json(doc, dir / "synth.json");
  out << "wrote " << flags.spec.n_samples << " samples (K=" << flags.spec.num_classes
      << ") to " << dir.string() << "; planted probe accuracy phi1 "
      << fixed(data.diagnostics.planted_phi1) << ", phi2 " << fixed(data.diagnostics.planted_phi2)
      << " [config " << doc.at("config_hash").get<std::string>() << "]\n";
  return kExitOk;
}

int run_train(const TrainFlags& flags, std::uint64_t seed, bool seed_given,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
  TrainConfig config = flags.resolve();
  if (seed_given) config.seed = seed;
  config.validate();
  const Inputs in = load_inputs(flags.phi1, flags.phi2);
  const RunResult run = train_run(in.phi1, in.phi2, config);
  const json doc = run_document(run, config, in);
  write_output(doc, out_path);
  const std::string hash = doc.at("config_hash").get<std::string>();
  if (!run.ok()) {
    err << "seed " << run.seed << " failed: " << run.failure << '\n';
    out << "seed " << run.seed << ": failed [config " << hash << "]\n";
    return kExitNumerical;
  }
  out << "seed " << run.seed << ": cv_accuracy " << fixed(run.cv_accuracy) << ", final loss "
      << fixed(run.objective_trace.empty() ? 0.0 : run.objective_trace.back()) << " [config "
      << hash << "] -> " << out_path << '\n';
  return kExitOk;
}

struct SweepFlags {
  int seeds = 10;
  std::uint64_t first_seed = 0;
  int jobs = 1;
  std::string out;
};

int run_sweep(const TrainFlags& flags, const SweepFlags& sweep, std::ostream& out,
              std::ostream& err) {
  const TrainConfig base = flags.resolve();
  base.validate();
  if (sweep.seeds < 1) raise(ErrorKind::kConfig, "--seeds must be at least 1");
  if (sweep.jobs < 1) raise(ErrorKind::kConfig, "--jobs must be at least 1");
  const Inputs in = load_inputs(flags.phi1, flags.phi2);
  const fs::path dir(sweep.out);
  fs::create_directories(dir);

  struct Outcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string failure;
    double cv_accuracy = 0.0;
  };
  const auto count = static_cast<std::size_t>(sweep.seeds);
  std::vector<Outcome> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        TrainConfig config = base;
        config.seed = sweep.first_seed + i;
        const RunResult run = train_run(in.phi1, in.phi2, config);
        write_json(run_document(run, config, in),
                   dir / ("run_" + std::to_string(config.seed) + ".json"));
        results[i] = {run.seed, run.ok(), run.failure, run.cv_accuracy};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(sweep.jobs), count);
    for (std::size_t j = 0; j < workers; ++j) pool.emplace_back(worker);
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  std::size_t ok = 0;
  const Outcome* best = nullptr;
  for (const auto& run : results) {
    if (!run.ok) {
      err << "seed " << run.seed << " failed: " << run.failure << '\n';
      continue;
    }
    ++ok;
    if (best == nullptr || run.cv_accuracy > best->cv_accuracy) best = &run;
    out << "seed " << run.seed << ": cv_accuracy " << fixed(run.cv_accuracy) << '\n';
  }
  TrainConfig echoed = base;
  echoed.seed = sweep.first_seed;
  out << ok << "/" << count << " runs succeeded";
  if (best != nullptr) {
    out << "; best seed " << best->seed << " (cv_accuracy " << fixed(best->cv_accuracy) << ")";
  }
  out << " [config " << config_hash(config_to_json(echoed)) << "] -> " << dir.string() << '\n';
  return ok == 0 ? kExitNumerical : kExitOk;
}

struct AggregateFlags {
  std::string runs;
  int k = 0;
  std::size_t top_n = 0;
  std::string out;
};

json run_identity(const std::vector<json>& runs) {
  json ids = json::array();
  for (const auto& r : runs) ids.push_back({{"seed", r.at("seed")}, {"config_hash", r.value("config_hash", "")}});
  return ids;
}

int run_aggregate(const AggregateFlags& flags, std::ostream& out, std::ostream& err) {
  const auto docs = load_runs(flags.runs, err);
  const auto runs = labeling_runs(docs);
  const int k = classes_of(docs, flags.k);
  const auto aligned = align_labelings(runs, k);
  const std::optional<std::size_t> top_n =
      flags.top_n > 0 ? std::optional<std::size_t>(flags.top_n) : std::nullopt;
  const AggregateResult result = majority_vote(runs, aligned, top_n);

  json votes = json::array();
  for (Index i = 0; i < result.votes.rows(); ++i) {
    votes.push_back(std::vector<std::int64_t>(result.votes.row(i).data(),
                                              result.votes.row(i).data() + result.votes.cols()));
  }
  json config = {{"k", k}, {"top_n", top_n ? json(*top_n) : json(nullptr)}, {"runs", run_identity(docs)}};
  const json doc = with_hash({{"command", "aggregate"},
                              {"config", config},
                              {"reference_seed", result.reference_seed},
                              {"voting_seeds", result.voting_seeds},
                              {"consensus", result.consensus},
                              {"votes", votes}});
  write_output(doc, flags.out);
  out << "aggregated " << result.voting_seeds.size() << " of " << runs.size()
      << " runs (reference seed " << result.reference_seed << ") [config "
      << doc.at("config_hash").get<std::string>() << "] -> " << flags.out << '\n';
  return kExitOk;
}

struct EvaluateFlags {
  std::string labels;
  std::string truth;
  std::string phi1;
  int k = 0;
  std::string out;
};

int label_range(const HardLabels& labels) {
  int top = -1;
  for (int v : labels) {
    if (v < 0) raise(ErrorKind::kData, "negative label " + std::to_string(v));
    top = std::max(top, v);
  }
  return top + 1;
}

int run_evaluate(const EvaluateFlags& flags, std::ostream& out) {
  const HardLabels pred = load_predictions(flags.labels);
  const GroundTruthLabels truth = load_truth(flags.truth, flags.phi1);
  if (pred.size() != truth.labels.size()) {
    raise(ErrorKind::kData, "prediction has " + std::to_string(pred.size()) +
                                " labels but ground truth has " + std::to_string(truth.labels.size()));
  }
  const int k = std::max({flags.k, truth.num_classes, label_range(pred)});
  const double acc = clustering_accuracy(pred, truth.labels, k);
  const double ari = adjusted_rand_index(pred, truth.labels);
  std::vector<std::int64_t> per_class(static_cast<std::size_t>(k), 0);
  for (int v : pred) ++per_class[static_cast<std::size_t>(v)];
  const json doc = with_hash({{"command", "evaluate"},
                              {"config", {{"k", k},
                                          {"labels", fs::path(flags.labels).filename().string()},
                                          {"n_samples", pred.size()}}},
                              {"acc", acc},
                              {"ari", ari},
                              {"per_class_counts", per_class}});
  if (!flags.out.empty()) write_output(doc, flags.out);
  out << "acc " << fixed(acc) << "  ari " << fixed(ari) << "  [config "
      << doc.at("config_hash").get<std::string>() << "]\n";
  return kExitOk;
}

struct CorrelateFlags {
  std::string runs;
  std::string truth;
  std::string phi1;
  int k = 0;
  std::string out;
};

int run_correlate(const CorrelateFlags& flags, std::ostream& out, std::ostream& err) {
  const auto docs = load_runs(flags.runs, err);
  const GroundTruthLabels truth = load_truth(flags.truth, flags.phi1);
  const int k = std::max(classes_of(docs, flags.k), truth.num_classes);
  std::ostringstream csv;
  csv << "seed,cv_accuracy,acc,config_hash\n";
  std::vector<double> cv, acc;
  for (const auto& doc : docs) {
    const LabelingRun run = labeling_run_from_json(doc);
    if (run.labels.size() != truth.labels.size()) {
      raise(ErrorKind::kData, "run " + std::to_string(run.seed) + " labels " +
                                  std::to_string(run.labels.size()) + " samples, truth has " +
                                  std::to_string(truth.labels.size()));
    }
    const double a = clustering_accuracy(run.labels, truth.labels, k);
    cv.push_back(run.cv_accuracy);
    acc.push_back(a);
    csv << run.seed << ',' << format_double(run.cv_accuracy) << ',' << format_double(a) << ','
        << doc.value("config_hash", "") << '\n';
  }
  if (flags.out.empty()) {
    out << csv.str();
  } else {
    write_text(flags.out, csv.str());
  }
  if (docs.size() >= 2) {
    out << "pearson(cv_accuracy, acc) = " << fixed(pearson_correlation(cv, acc)) << " over "
        << docs.size() << " runs\n";
  }
  return kExitOk;
}

struct ReliableFlags {
  std::string runs;
  std::string phi1;
  int k = 0;
  std::size_t nk = 25;
  int n_neigh = 20;
  std::string truth;
  std::string out;
};

int run_reliable(const ReliableFlags& flags, std::ostream& out, std::ostream& err) {
  const auto docs = load_runs(flags.runs, err);
  const auto runs = labeling_runs(docs);
  const int k = classes_of(docs, flags.k);
  const EmbeddingSpace phi1 = load_space(flags.phi1);
  const auto aligned = align_labelings(runs, k);
  const ReliableSet set = select_reliable(runs, aligned, phi1.matrix, flags.nk, flags.n_neigh);

  json classes = json::array();
  std::vector<Index> all;
  for (std::size_t c = 0; c < set.per_class.size(); ++c) {
    json indices = json::array(), a_nn = json::array(), a_tau = json::array();
    for (const auto& s : set.per_class[c]) {
      indices.push_back(s.index);
      a_nn.push_back(s.a_nn);
      a_tau.push_back(s.a_tau);
      all.push_back(s.index);
    }
    classes.push_back({{"class", c}, {"indices", indices}, {"a_nn", a_nn}, {"a_tau", a_tau}});
  }
  json config = {{"k", k},
                 {"nk", flags.nk},
                 {"n_neigh", flags.n_neigh},
                 {"phi1", space_summary(phi1)},
                 {"runs", run_identity(docs)}};
  json doc = {{"command", "reliable"},
              {"config", config},
              {"per_class", classes},
              {"short_classes", set.short_classes}};

  // Accuracy of the selected samples under the best matching of majority labels.
  std::optional<double> reliable_acc;
  if (!flags.truth.empty() || load_manifest_labels(flags.phi1)) {
    const GroundTruthLabels truth = load_truth(flags.truth, flags.phi1);
    HardLabels pred, gold;
    for (std::size_t c = 0; c < set.per_class.size(); ++c) {
      for (const auto& s : set.per_class[c]) {
        pred.push_back(static_cast<int>(c));
        gold.push_back(truth.labels.at(static_cast<std::size_t>(s.index)));
      }
    }
    reliable_acc = clustering_accuracy(pred, gold, std::max(k, truth.num_classes));
    doc["accuracy"] = *reliable_acc;
  }
  doc = with_hash(doc);
  write_output(doc, flags.out);
  for (int c : set.short_classes) {
    err << "warning: class " << c << " has fewer than " << flags.nk << " members\n";
  }
  out << "selected " << all.size() << " reliable samples over " << k << " classes";
  if (reliable_acc) out << " (accuracy " << fixed(*reliable_acc) << ")";
  out << " [config " << doc.at("config_hash").get<std::string>() << "] -> " << flags.out << '\n';
  return kExitOk;
}

struct KMeansFlags {
  std::string phi1;
  std::string truth;
  int k = 10;
  int restarts = 100;
  int max_iter = 300;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::string out;
};

int run_kmeans(const KMeansFlags& flags, std::ostream& out) {
  EmbeddingSpace space = load_space(flags.phi1);
  if (flags.normalize) space = normalize_rows(space);
  std::optional<HardLabels> truth;
  if (!flags.truth.empty() || load_manifest_labels(flags.phi1)) {
    truth = load_truth(flags.truth, flags.phi1).labels;
  }
  KMeansOptions options;
  options.num_clusters = flags.k;
  options.runs = flags.restarts;
  options.max_iterations = flags.max_iter;
  options.seed = flags.seed;
  const KMeansReport report = kmeans(space.matrix, options, truth);

  json runs = json::array();
  for (const auto& run : report.runs) {
    json r = {{"inertia", run.inertia}, {"iterations", run.iterations}};
    if (run.acc) r["acc"] = *run.acc;
    if (run.ari) r["ari"] = *run.ari;
    runs.push_back(r);
  }
  json doc = {{"command", "kmeans"},
              {"config", {{"k", flags.k},
                          {"restarts", flags.restarts},
                          {"max_iter", flags.max_iter},
                          {"seed", flags.seed},
                          {"normalize", flags.normalize},
                          {"space", space_summary(space)}}},
              {"runs", runs},
              {"best_run", report.best_run},
              {"best_labels", report.runs[report.best_run].labels}};
  if (report.mean_acc) doc["mean_acc"] = *report.mean_acc;
  if (report.mean_ari) doc["mean_ari"] = *report.mean_ari;
  doc = with_hash(doc);
  if (!flags.out.empty()) write_output(doc, flags.out);
  out << report.runs.size() << " k-means runs";
  if (report.mean_acc) {
    out << ": mean acc " << fixed(*report.mean_acc) << ", mean ari " << fixed(*report.mean_ari);
  }
  out << " [config " << doc.at("config_hash").get<std::string>() << "]\n";
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumerical:
    case ErrorKind::kDegenerate:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search for labelings that are learnable in two representation spaces.",
               "labelsearch"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a paired-space fixture with planted labels");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--n", synth.spec.n_samples, "Samples");
  synth_cmd->add_option("--k", synth.spec.num_classes, "Planted classes");
  synth_cmd->add_option("--latent-dim", synth.spec.latent_dim, "Latent dimension");
  synth_cmd->add_option("--d1", synth.spec.d1, "phi1 dimension");
  synth_cmd->add_option("--d2", synth.spec.d2, "phi2 dimension");
  synth_cmd->add_option("--separation", synth.spec.cluster_separation, "Latent class mean distance");
  synth_cmd->add_option("--noise", synth.spec.noise_sigma, "Latent within-class spread");
  synth_cmd->add_option("--ambient-noise", synth.spec.ambient_sigma, "Output-space noise");
  synth_cmd->add_option("--offset", synth.spec.offset, "Shared mean shift");
  synth_cmd->add_flag("--spurious", synth.spec.spurious, "Add a phi1-only labeling");
  synth_cmd->add_option("--spurious-separation", synth.spec.spurious_separation,
                        "Separation of the phi1-only labeling");
  synth_cmd->add_option("--min-probe-acc", synth.spec.min_probe_accuracy,
                        "Required planted probe accuracy");
  synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed");

  TrainFlags train;
  std::uint64_t train_seed = 0;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "Run one search from a single seed");
  train.attach(train_cmd);
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Run seed");
  train_cmd->add_option("--out", train_out, "Run JSON path")->required();

  TrainFlags sweep_train;
  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one search per seed");
  sweep_train.attach(sweep_cmd);
  sweep_cmd->add_option("--seeds", sweep.seeds, "Number of seeds");
  sweep_cmd->add_option("--seed", sweep.first_seed, "First seed");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads");
  sweep_cmd->add_option("--out", sweep.out, "Output directory for run_<seed>.json")->required();

  AggregateFlags aggregate;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Majority vote over aligned runs");
  aggregate_cmd->add_option("--runs", aggregate.runs, "Directory of run JSONs")->required();
  aggregate_cmd->add_option("--k", aggregate.k, "Classes (default: from the runs)");
  aggregate_cmd->add_option("--top-n", aggregate.top_n, "Vote with the top-n runs by cv_accuracy");
  aggregate_cmd->add_option("--out", aggregate.out, "Output JSON")->required();

  EvaluateFlags evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a labeling against ground truth");
  evaluate_cmd->add_option("--labels", evaluate.labels, "Labels text, run JSON or aggregate JSON")
      ->required();
  evaluate_cmd->add_option("--truth", evaluate.truth, "Ground-truth labels");
  evaluate_cmd->add_option("--phi1", evaluate.phi1, "Manifest whose labels_path gives the truth");
  evaluate_cmd->add_option("--k", evaluate.k, "Classes");
  evaluate_cmd->add_option("--out", evaluate.out, "Output JSON");

  CorrelateFlags correlate;
  auto* correlate_cmd = app.add_subcommand("correlate", "Tabulate cv_accuracy against accuracy");
  correlate_cmd->add_option("--runs", correlate.runs, "Directory of run JSONs")->required();
  correlate_cmd->add_option("--truth", correlate.truth, "Ground-truth labels");
  correlate_cmd->add_option("--phi1", correlate.phi1, "Manifest whose labels_path gives the truth");
  correlate_cmd->add_option("--k", correlate.k, "Classes");
  correlate_cmd->add_option("--out", correlate.out, "Output CSV (default: stdout)");

  ReliableFlags reliable;
  auto* reliable_cmd = app.add_subcommand("reliable", "Select per-class reliable samples");
  reliable_cmd->add_option("--runs", reliable.runs, "Directory of run JSONs")->required();
  reliable_cmd->add_option("--phi1", reliable.phi1, "Manifest of the neighbor space")->required();
  reliable_cmd->add_option("--k", reliable.k, "Classes (default: from the runs)");
  reliable_cmd->add_option("--nk", reliable.nk, "Samples per class");
  reliable_cmd->add_option("--n-neigh", reliable.n_neigh, "Cosine neighbors per sample");
  reliable_cmd->add_option("--truth", reliable.truth, "Ground truth for reporting accuracy");
  reliable_cmd->add_option("--out", reliable.out, "Output JSON")->required();

  KMeansFlags km;
  auto* kmeans_cmd = app.add_subcommand("kmeans", "k-means baseline");
  kmeans_cmd->add_option("--phi1", km.phi1, "Manifest of the space to cluster")->required();
  kmeans_cmd->add_option("--truth", km.truth, "Ground-truth labels");
  kmeans_cmd->add_option("--k", km.k, "Clusters");
  kmeans_cmd->add_option("--restarts", km.restarts, "Independent runs");
  kmeans_cmd->add_option("--max-iter", km.max_iter, "Lloyd iterations per run");
  kmeans_cmd->add_option("--seed", km.seed, "Seed");
  kmeans_cmd->add_flag("--normalize", km.normalize, "L2-normalize rows first");
  kmeans_cmd->add_option("--out", km.out, "Output JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth, out);
    if (*train_cmd) return run_train(train, train_seed, train_seed_opt->count() > 0, train_out, out, err);
    if (*sweep_cmd) return run_sweep(sweep_train, sweep, out, err);
    if (*aggregate_cmd) return run_aggregate(aggregate, out, err);
    if (*evaluate_cmd) return run_evaluate(evaluate, out);
    if (*correlate_cmd) return run_correlate(correlate, out, err);
    if (*reliable_cmd) return run_reliable(reliable, out, err);
    if (*kmeans_cmd) return run_kmeans(km, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace labelsearch::cli
