#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "signface/errors.hpp"
#include "signface/formats.hpp"
#include "signface/pipeline.hpp"
#include "signface/synth.hpp"
#include "support/oracles.hpp"

using namespace signface;
namespace fs = std::filesystem;

namespace {

ModelCheckpoint bias_only_checkpoint(const DetectorProfile& profile, double a, double b, double c) {
  ModelCheckpoint ckpt;
  ckpt.profile = profile;
  ckpt.classifier.input_channels = profile.feature_dim();
  ckpt.params = ModelParams::zeros(ckpt.classifier);
  ckpt.params.fc2_b << a, b, c;
  return ckpt;
}

TrainingData small_data(int per_class, std::uint64_t seed = 0) {
  SynthConfig synth;
  synth.profile = dlib68();
  synth.seed = seed;
  TrainingData data;
  data.profile = dlib68();
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < per_class; ++i) {
      auto x = prepare_features(generate_sample(SentenceType(k), synth, std::uint64_t(i)));
      (i % 4 == 3 ? data.val : data.train).push_back({std::move(x), SentenceType(k)});
    }
  return data;
}

TrainConfig quick_config(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.classifier.conv_filters = 4;
  cfg.classifier.hidden_units = 8;
  cfg.augment.copies_per_sample = 1;
  cfg.classifier.seed = cfg.augment.seed = cfg.shuffle_seed = 3;
  return cfg;
}

std::string saved(const ModelCheckpoint& c) {
  std::ostringstream os;
  save_checkpoint(c, os);
  return os.str();
}

}  // namespace

TEST_CASE("predict returns the softmax of the logits") {
  Rng rng(1);
  const auto seq = testing::random_sequence(rng, openpose70(), 40);
  const auto p = predict(bias_only_checkpoint(openpose70(), 2, -1, -1), seq);
  const double z = std::exp(2.0) + 2 * std::exp(-1.0);
  CHECK(p.label == SentenceType::affirmative);
  CHECK(p.probabilities[0] == doctest::Approx(std::exp(2.0) / z).epsilon(1e-14));
  CHECK(p.probabilities[1] == doctest::Approx(std::exp(-1.0) / z).epsilon(1e-14));
  CHECK(p.probabilities[2] == doctest::Approx(std::exp(-1.0) / z).epsilon(1e-14));
  CHECK(p.probabilities[0] == doctest::Approx(0.9094).epsilon(1e-4));

  const auto tie = predict(bias_only_checkpoint(openpose70(), 0, 1, 1), seq);
  CHECK(tie.label == SentenceType::yes_no_question);
}

TEST_CASE("predict rejects a sequence from another detector") {
  Rng rng(2);
  const auto ckpt = bias_only_checkpoint(openpose70(), 0, 0, 0);
  CHECK_THROWS_AS(predict(ckpt, testing::random_sequence(rng, mediapipe468(), 10)), ProfileMismatch);
  CHECK_THROWS_AS(predict(ckpt, testing::random_sequence(rng, dlib68(), 10)), ProfileMismatch);
}

TEST_CASE("checkpoint round trip is bitwise exact") {
  Rng rng(3);
  ModelCheckpoint ckpt;
  ckpt.profile = dlib68();
  ckpt.classifier.input_channels = 136;
  ckpt.classifier.conv_filters = 3;
  ckpt.classifier.hidden_units = 5;
  ckpt.classifier.seed = 99;
  ckpt.params = testing::random_params(rng, ckpt.classifier);
  ckpt.params.fc1_b(0) = 4.9406564584124654e-324;
  ckpt.params.fc1_b(1) = -0.0;
  ckpt.fingerprint = {1, 2, 3, 50, 0.123456789012345678, 17, 73.0 / 76.0};

  const auto text = saved(ckpt);
  std::istringstream in(text);
  const auto back = load_checkpoint(in);
  CHECK(back == ckpt);
  CHECK(std::signbit(back.params.fc1_b(1)));
  CHECK(saved(back) == text);

  const auto j = nlohmann::json::parse(text);
  CHECK(j["format_version"] == 1);
  CHECK(j["profile"] == "dlib68");
  CHECK(j["params"]["conv_w"].size() == 3);
  CHECK(j["params"]["conv_w"][0].size() == 136);
  CHECK(j["params"]["conv_w"][0][0].size() == 5);
  CHECK(j["params"]["conv_w"][2][7][4].get<double>() == back.params.conv(2, 7, 4, 136));
}

TEST_CASE("checkpoint load errors") {
  Rng rng(4);
  ModelCheckpoint ckpt;
  ckpt.profile = dlib68();
  ckpt.classifier.input_channels = 136;
  ckpt.classifier.conv_filters = 2;
  ckpt.classifier.hidden_units = 3;
  ckpt.params = testing::random_params(rng, ckpt.classifier);
  const auto text = saved(ckpt);
  auto load = [](const std::string& s) {
    std::istringstream in(s);
    return load_checkpoint(in);
  };

  auto j = nlohmann::json::parse(text);
  j["format_version"] = 99;
  CHECK_THROWS_AS(load(j.dump()), UnsupportedVersion);
  CHECK_THROWS_AS(load(text.substr(0, text.size() / 2)), MalformedInput);

  j = nlohmann::json::parse(text);
  j["params"]["fc2_b"].erase(0);
  CHECK_THROWS_AS(load(j.dump()), MalformedInput);

  j = nlohmann::json::parse(text);
  j["profile"] = "openpose70";
  CHECK_THROWS_AS(load(j.dump()), MalformedInput);
}

TEST_CASE("training is deterministic and tracks the best epoch") {
  const auto data = small_data(8);
  const auto cfg = quick_config(4);
  std::vector<EpochRecord> seen;
  const auto a = train_on(data, cfg, [&](const EpochRecord& r) { seen.push_back(r); });
  const auto b = train_on(data, cfg);
  CHECK(saved(a.checkpoint) == saved(b.checkpoint));
  CHECK(history_to_json(a.history) == history_to_json(b.history));
  CHECK(seen == a.history);
  REQUIRE(a.history.size() == 4);

  double best = -1;
  int best_epoch = 0;
  for (const auto& r : a.history)
    if (r.val_accuracy >= best) best = r.val_accuracy, best_epoch = r.epoch;
  const auto& fp = a.checkpoint.fingerprint;
  CHECK(fp.best_epoch == best_epoch);
  CHECK(fp.best_val_accuracy == best);
  CHECK(fp.epochs == 4);
  CHECK(fp.final_train_loss == a.history.back().train_loss);
  CHECK(evaluate_tensors(a.checkpoint, data.val).accuracy == best);
  CHECK(a.checkpoint.classifier.input_channels == 136);

  auto other = cfg;
  other.shuffle_seed = 4;
  CHECK_FALSE(saved(train_on(data, other).checkpoint) == saved(a.checkpoint));
}

TEST_CASE("training loss falls on a learnable task") {
  const auto data = small_data(8);
  auto cfg = quick_config(15);
  const auto r = train_on(data, cfg);
  CHECK(r.history.back().train_loss < r.history.front().train_loss);
}

TEST_CASE("training input errors") {
  auto data = small_data(4);
  auto empty_val = data;
  empty_val.val.clear();
  CHECK_THROWS_AS(train_on(empty_val, quick_config(1)), EmptyDataset);
  auto empty_train = data;
  empty_train.train.clear();
  CHECK_THROWS_AS(train_on(empty_train, quick_config(1)), EmptyDataset);
  auto bad = quick_config(1);
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_on(data, bad), ConfigError);
  CHECK_THROWS_AS(evaluate_tensors(bias_only_checkpoint(dlib68(), 0, 0, 0), {}), EmptyDataset);
}

TEST_CASE("manifest-driven training and evaluation") {
  const auto dir = fs::temp_directory_path() / "signface_pipeline_test";
  fs::remove_all(dir);
  SynthConfig synth;
  synth.profile = dlib68();
  synth.counts = {4, 4, 4};
  auto manifest = assign_split_counts(generate_dataset(synth, dir), {3, 3, 3});
  const auto r = train(manifest, quick_config(2), dir);
  const auto report = evaluate(r.checkpoint, manifest, Split::val, dir);
  CHECK(report.n == 3);
  CHECK(report.accuracy == r.checkpoint.fingerprint.best_val_accuracy);
  CHECK(evaluate(r.checkpoint, manifest, Split::train, dir).n == 9);

  // a sample from another detector in the same manifest
  write_canonical_file(generate_sample(SentenceType::affirmative, SynthConfig{}, 0),
                       dir / "intruder.jsonl");
  manifest.samples.push_back({"intruder.jsonl", SentenceType::affirmative, Split::val, {}});
  CHECK_THROWS_AS(train(manifest, quick_config(1), dir), ProfileMismatch);

  manifest.samples.back().path = "missing.jsonl";
  CHECK_THROWS_AS(train(manifest, quick_config(1), dir), IoFailure);
  fs::remove_all(dir);
}
