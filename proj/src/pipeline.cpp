#include "signface/pipeline.hpp"

#include <numeric>
#include <sstream>

#include <json.hpp>

#include "signface/errors.hpp"
#include "signface/formats.hpp"
#include "signface/rng.hpp"

namespace signface {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  classifier.validate();
  augment.validate(classifier.input_length);
}

namespace {

LabeledTensor load_sample(const ManifestEntry& entry, const fs::path& data_root,
                          const DetectorProfile* expected, const WarningSink& warn) {
  const fs::path path = data_root / entry.path;
  auto seq = read_canonical_file(path);
  if (expected && !(seq.profile == *expected))
    throw ProfileMismatch(path.string() + ": profile " + std::string(seq.profile.id()) +
                          " differs from " + std::string(expected->id()));
  WarningSink tagged;
  if (warn) tagged = [&](const std::string& msg) { warn(path.string() + ": " + msg); };
  return {prepare_features(std::move(seq), tagged), entry.label};
}

}  // namespace

TrainingData load_training_data(const DatasetManifest& manifest, const fs::path& data_root,
                                const WarningSink& warn) {
  manifest.validate();
  const auto train_entries = manifest.in_split(Split::train);
  const auto val_entries = manifest.in_split(Split::val);
  if (train_entries.empty()) throw EmptyDataset("manifest has no train samples");
  if (val_entries.empty()) throw EmptyDataset("manifest has no val samples");

  TrainingData data;
  const auto first = read_canonical_file(data_root / train_entries.front()->path);
  data.profile = first.profile;
  for (const auto* e : train_entries)
    data.train.push_back(load_sample(*e, data_root, &data.profile, warn));
  for (const auto* e : val_entries)
    data.val.push_back(load_sample(*e, data_root, &data.profile, warn));
  return data;
}

Prediction predict_tensor(const ModelCheckpoint& ckpt, const FeatureTensor& x) {
  const auto [logits, cache] = nn::forward(ckpt.classifier, ckpt.params, x);
  const auto p = nn::softmax(logits);
  Prediction out{sentence_type_from_index(nn::argmax(logits)), {}};
  for (int k = 0; k < kNumClasses; ++k) out.probabilities[k] = p(k);
  return out;
}

Prediction predict(const ModelCheckpoint& ckpt, const LandmarkSequence& seq,
                   const WarningSink& warn) {
  if (!(seq.profile == ckpt.profile))
    throw ProfileMismatch("sequence profile " + std::string(seq.profile.id()) +
                          " does not match checkpoint profile " + std::string(ckpt.profile.id()));
  return predict_tensor(ckpt, prepare_features(seq, warn));
}

EvalReport evaluate_tensors(const ModelCheckpoint& ckpt, const std::vector<LabeledTensor>& set) {
  if (set.empty()) throw EmptyDataset("nothing to evaluate");
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  for (const auto& s : set) tally(confusion, s.label, predict_tensor(ckpt, s.x).label);
  return compute_report(confusion);
}

EvalReport evaluate(const ModelCheckpoint& ckpt, const DatasetManifest& manifest, Split split,
                    const fs::path& data_root, const WarningSink& warn) {
  const auto entries = manifest.in_split(split);
  if (entries.empty())
    throw EmptyDataset("manifest has no samples in split " + std::string(to_string(split)));
  std::vector<LabeledTensor> set;
  set.reserve(entries.size());
  for (const auto* e : entries) set.push_back(load_sample(*e, data_root, &ckpt.profile, warn));
  return evaluate_tensors(ckpt, set);
}

TrainResult train_on(const TrainingData& data, TrainConfig cfg, const EpochCallback& on_epoch) {
  if (data.train.empty()) throw EmptyDataset("no training samples");
  if (data.val.empty()) throw EmptyDataset("no validation samples");
  cfg.classifier.input_channels = data.profile.feature_dim();
  cfg.classifier.input_length = static_cast<int>(data.train.front().x.rows());
  cfg.validate();
  const auto& net = cfg.classifier;

  // Originals first, then permuted copies as frame maps over the normalized tensor.
  struct Item {
    std::size_t source;
    std::vector<int> frame_map;  // empty: identity
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < data.train.size(); ++i) items.push_back({i, {}});
  for (std::size_t i = 0; i < data.train.size(); ++i)
    for (int c = 0; c < cfg.augment.copies_per_sample; ++c)
      items.push_back({i, draw_segment_plan(cfg.augment, net.input_length, i,
                                            static_cast<std::uint64_t>(c))
                              .frame_map(net.input_length)});

  TrainResult result;
  result.checkpoint.profile = data.profile;
  result.checkpoint.classifier = net;
  auto params = nn::init_params<double>(net);
  auto adam = nn::AdamState<double>::zeros(net);
  auto grads = nn::GradientSet<double>::zeros(net);

  std::vector<std::size_t> order(items.size());
  FeatureTensor permuted;
  int step = 0;
  double best_accuracy = -1;
  ModelParams best_params;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng(derive_seed(cfg.shuffle_seed, {static_cast<std::uint64_t>(epoch)}))
        .shuffle(order.begin(), order.end());

    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      grads.visit([](const char*, auto& t) { t.setZero(); });
      for (std::size_t b = start; b < end; ++b) {
        const auto& item = items[order[b]];
        const auto& sample = data.train[item.source];
        const FeatureTensor* x = &sample.x;
        if (!item.frame_map.empty()) {
          permuted = sample.x(item.frame_map, Eigen::all);
          x = &permuted;
        }
        const auto [logits, cache] = nn::forward(net, params, *x);
        const auto loss = nn::softmax_cross_entropy(logits, index_of(sample.label));
        loss_sum += loss.loss;
        nn::accumulate_gradients(net, params, cache, loss.dlogits, grads);
      }
      grads *= 1.0 / static_cast<double>(end - start);
      nn::adam_update(params, adam, grads, cfg.learning_rate, ++step);
    }

    result.checkpoint.params = params;
    const EpochRecord record{epoch, loss_sum / static_cast<double>(items.size()),
                             evaluate_tensors(result.checkpoint, data.val).accuracy};
    result.history.push_back(record);
    if (record.val_accuracy >= best_accuracy) {
      best_accuracy = record.val_accuracy;
      best_params = params;
      result.checkpoint.fingerprint.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(record);
  }

  auto& fp = result.checkpoint.fingerprint;
  result.checkpoint.params = std::move(best_params);
  fp.classifier_seed = net.seed;
  fp.augment_seed = cfg.augment.seed;
  fp.shuffle_seed = cfg.shuffle_seed;
  fp.epochs = cfg.epochs;
  fp.final_train_loss = result.history.back().train_loss;
  fp.best_val_accuracy = best_accuracy;
  return result;
}

TrainResult train(const DatasetManifest& manifest, const TrainConfig& cfg, const fs::path& data_root,
                  const EpochCallback& on_epoch, const WarningSink& warn) {
  return train_on(load_training_data(manifest, data_root, warn), cfg, on_epoch);
}

std::string history_to_json(const std::vector<EpochRecord>& history) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : history) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["val_accuracy"] = r.val_accuracy;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace signface
