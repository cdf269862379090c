#pragma once

// Training, evaluation, prediction and checkpoint persistence.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "signface/dataset.hpp"
#include "signface/metrics.hpp"
#include "signface/nn.hpp"
#include "signface/preprocess.hpp"

namespace signface {

using ModelParams = nn::Params<double>;

struct TrainConfig {
  nn::ClassifierConfig classifier;
  AugmentConfig augment;
  int epochs = 50;
  int batch_size = 16;
  double learning_rate = 1e-4;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainingFingerprint {
  std::uint64_t classifier_seed = 0;
  std::uint64_t augment_seed = 0;
  std::uint64_t shuffle_seed = 0;
  int epochs = 0;
  double final_train_loss = 0;
  int best_epoch = 0;
  double best_val_accuracy = 0;

  bool operator==(const TrainingFingerprint&) const = default;
};

inline constexpr int kCheckpointFormatVersion = 1;

struct ModelCheckpoint {
  int format_version = kCheckpointFormatVersion;
  DetectorProfile profile;
  nn::ClassifierConfig classifier;
  ModelParams params;
  TrainingFingerprint fingerprint;

  bool operator==(const ModelCheckpoint&) const = default;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double val_accuracy = 0;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::vector<EpochRecord> history;
};

struct LabeledTensor {
  FeatureTensor x;
  SentenceType label;
};

/// Preprocessed tensors for both splits, all from one detector profile.
struct TrainingData {
  DetectorProfile profile;
  std::vector<LabeledTensor> train;
  std::vector<LabeledTensor> val;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Loads, pads and normalizes every train/val sample named by the manifest.
/// Paths are resolved against data_root. Throws EmptyDataset, ProfileMismatch,
/// MalformedInput (with the file path).
TrainingData load_training_data(const DatasetManifest& manifest,
                                const std::filesystem::path& data_root,
                                const WarningSink& warn = {});

/// Augments the train split, then runs cfg.epochs of shuffled minibatch Adam.
/// The returned checkpoint holds the parameters of the epoch with the best
/// validation accuracy (ties go to the later epoch). input_channels and
/// input_length of cfg.classifier are taken from the data.
TrainResult train_on(const TrainingData& data, TrainConfig cfg,
                     const EpochCallback& on_epoch = {});

TrainResult train(const DatasetManifest& manifest, const TrainConfig& cfg,
                  const std::filesystem::path& data_root, const EpochCallback& on_epoch = {},
                  const WarningSink& warn = {});

/// Class probabilities and argmax label (ties -> lowest class index).
struct Prediction {
  SentenceType label;
  std::array<double, kNumClasses> probabilities;
};

Prediction predict_tensor(const ModelCheckpoint& ckpt, const FeatureTensor& x);
/// Throws ProfileMismatch when the sequence comes from another detector.
Prediction predict(const ModelCheckpoint& ckpt, const LandmarkSequence& seq,
                   const WarningSink& warn = {});

EvalReport evaluate_tensors(const ModelCheckpoint& ckpt, const std::vector<LabeledTensor>& set);
EvalReport evaluate(const ModelCheckpoint& ckpt, const DatasetManifest& manifest, Split split,
                    const std::filesystem::path& data_root, const WarningSink& warn = {});

void save_checkpoint(const ModelCheckpoint& ckpt, std::ostream& sink);
ModelCheckpoint load_checkpoint(std::istream& source);
void save_checkpoint_file(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint_file(const std::filesystem::path& path);

std::string history_to_json(const std::vector<EpochRecord>& history);

}  // namespace signface
