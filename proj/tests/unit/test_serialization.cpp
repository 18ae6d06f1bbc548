#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "labelsearch/errors.hpp"
#include "labelsearch/serialization.hpp"

using namespace labelsearch;

TEST_CASE("encoder JSON round-trips exactly") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    TaskEncoder enc;
    enc.m = testing::random_matrix(1 + trial % 5, 6, rng);
    enc.gamma = 0.01 * (trial + 1);
    enc.seed = static_cast<std::uint64_t>(trial) * 7919u;
    const auto text = encoder_to_json(enc).dump();
    CHECK(encoder_from_json(nlohmann::json::parse(text)) == enc);
  }
  CHECK_THROWS_AS(encoder_from_json(nlohmann::json{{"K", 2}, {"d1", 2}, {"gamma", 0.1}, {"M", {1.0}}, {"seed", 0}}), Error);
}

TEST_CASE("config JSON") {
  SUBCASE("round trip of every preset") {
    for (const auto& name : preset_names()) {
      TrainConfig c = preset_config(name);
      c.seed = 42;
      c.eta = 3.5;
      CHECK(config_from_json(config_to_json(c)) == c);
    }
  }
  SUBCASE("preset is applied before explicit keys") {
    const TrainConfig c = config_from_json(nlohmann::json{{"preset", "imagenet"}, {"inner_steps", 7}});
    CHECK(c.num_classes == 1000);
    CHECK(c.inner_steps == 7);
  }
  SUBCASE("hash is stable and sensitive") {
    const TrainConfig c;
    CHECK(config_hash(config_to_json(c)) == config_hash(config_to_json(TrainConfig{})));
    CHECK(config_hash(config_to_json(c)).size() == 8);
    TrainConfig d;
    d.eta = 9.0;
    CHECK(config_hash(config_to_json(c)) != config_hash(config_to_json(d)));
  }
}

TEST_CASE("run JSON feeds aggregation") {
  RunResult run;
  run.seed = 9;
  run.cv_accuracy = 0.75;
  run.encoder.m = Matrix::Identity(2, 3);
  run.labeling.hard = {0, 1, 1};
  run.labeling.probs = Matrix::Zero(3, 2);
  run.objective_trace = {1.0, 0.5};
  const auto doc = run_to_json(run, TrainConfig{});
  CHECK(doc.at("config_hash") == config_hash(doc.at("config")));
  const LabelingRun back = labeling_run_from_json(doc);
  CHECK(back.seed == 9);
  CHECK(back.cv_accuracy == 0.75);
  CHECK(back.labels == HardLabels{0, 1, 1});

  testing::TempDir dir("serialization");
  write_json(doc, dir.path() / "run.json");
  CHECK(read_json(dir.path() / "run.json") == doc);
  CHECK_THROWS_AS(read_json(dir.path() / "missing.json"), Error);
}
