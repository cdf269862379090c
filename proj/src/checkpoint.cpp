#include <fstream>
#include <sstream>

#include <json.hpp>

#include "signface/errors.hpp"
#include "signface/pipeline.hpp"

namespace signface {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json classifier_json(const nn::ClassifierConfig& c) {
  ordered_json j;
  j["input_channels"] = c.input_channels;
  j["input_length"] = c.input_length;
  j["conv_filters"] = c.conv_filters;
  j["kernel_size"] = c.kernel_size;
  j["hidden_units"] = c.hidden_units;
  j["num_classes"] = c.num_classes;
  j["seed"] = c.seed;
  return j;
}

nn::ClassifierConfig classifier_from_json(const json& j) {
  nn::ClassifierConfig c;
  c.input_channels = j.at("input_channels").get<int>();
  c.input_length = j.at("input_length").get<int>();
  c.conv_filters = j.at("conv_filters").get<int>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.num_classes = j.at("num_classes").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw MalformedInput(std::string("checkpoint classifier: ") + e.what());
  }
  return c;
}

template <class Derived>
ordered_json matrix_json(const Eigen::MatrixBase<Derived>& m) {
  auto rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class Derived>
ordered_json vector_json(const Eigen::MatrixBase<Derived>& v) {
  auto arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

double number(const json& v) {
  if (!v.is_number()) throw MalformedInput("checkpoint: non-numeric weight");
  return v.get<double>();
}

void read_vector(const json& j, nn::Vector<double>& out, const char* name) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(out.size()))
    throw MalformedInput(std::string("checkpoint: ") + name + " has the wrong length");
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = number(j[i]);
}

void read_matrix(const json& j, nn::Matrix<double>& out, const char* name) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(out.rows()))
    throw MalformedInput(std::string("checkpoint: ") + name + " has the wrong row count");
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(out.cols()))
      throw MalformedInput(std::string("checkpoint: ") + name + " has the wrong column count");
    for (Eigen::Index k = 0; k < out.cols(); ++k) out(i, k) = number(row[k]);
  }
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, std::ostream& sink) {
  const auto& c = ckpt.classifier;
  if (!ckpt.params.matches(c)) throw ShapeError("checkpoint parameters do not match classifier");

  ordered_json j;
  j["format_version"] = ckpt.format_version;
  j["profile"] = std::string(ckpt.profile.id());
  j["classifier"] = classifier_json(c);

  ordered_json params;
  // conv_w as [filter][channel][tap].
  auto conv = ordered_json::array();
  for (int f = 0; f < c.conv_filters; ++f) {
    auto per_channel = ordered_json::array();
    for (int ch = 0; ch < c.input_channels; ++ch) {
      auto taps = ordered_json::array();
      for (int k = 0; k < c.kernel_size; ++k)
        taps.push_back(ckpt.params.conv(f, ch, k, c.input_channels));
      per_channel.push_back(std::move(taps));
    }
    conv.push_back(std::move(per_channel));
  }
  params["conv_w"] = std::move(conv);
  params["conv_b"] = vector_json(ckpt.params.conv_b);
  params["fc1_w"] = matrix_json(ckpt.params.fc1_w);
  params["fc1_b"] = vector_json(ckpt.params.fc1_b);
  params["fc2_w"] = matrix_json(ckpt.params.fc2_w);
  params["fc2_b"] = vector_json(ckpt.params.fc2_b);
  j["params"] = std::move(params);

  const auto& fp = ckpt.fingerprint;
  ordered_json f;
  f["seeds"] = {{"classifier", fp.classifier_seed},
                {"augment", fp.augment_seed},
                {"shuffle", fp.shuffle_seed}};
  f["epochs"] = fp.epochs;
  f["final_train_loss"] = fp.final_train_loss;
  f["best_epoch"] = fp.best_epoch;
  f["best_val_accuracy"] = fp.best_val_accuracy;
  j["training_fingerprint"] = std::move(f);

  sink << j.dump() << '\n';
  if (!sink) throw IoFailure("checkpoint write failed");
}

ModelCheckpoint load_checkpoint(std::istream& source) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("checkpoint: invalid JSON (") + e.what() + ")");
  }
  ModelCheckpoint ckpt;
  try {
    ckpt.format_version = j.at("format_version").get<int>();
    if (ckpt.format_version != kCheckpointFormatVersion)
      throw UnsupportedVersion("checkpoint format_version " + std::to_string(ckpt.format_version) +
                               " is not supported (expected " +
                               std::to_string(kCheckpointFormatVersion) + ")");
    try {
      ckpt.profile = profile_by_id(j.at("profile").get<std::string>());
    } catch (const ConfigError& e) {
      throw MalformedInput(std::string("checkpoint: ") + e.what());
    }
    const auto c = classifier_from_json(j.at("classifier"));
    if (c.input_channels != ckpt.profile.feature_dim())
      throw MalformedInput("checkpoint: input_channels does not match the profile");
    ckpt.classifier = c;

    ckpt.params = ModelParams::zeros(c);
    const auto& p = j.at("params");
    const auto& conv = p.at("conv_w");
    if (!conv.is_array() || conv.size() != static_cast<std::size_t>(c.conv_filters))
      throw MalformedInput("checkpoint: conv_w has the wrong filter count");
    for (int f = 0; f < c.conv_filters; ++f) {
      if (!conv[f].is_array() || conv[f].size() != static_cast<std::size_t>(c.input_channels))
        throw MalformedInput("checkpoint: conv_w has the wrong channel count");
      for (int ch = 0; ch < c.input_channels; ++ch) {
        const auto& taps = conv[f][ch];
        if (!taps.is_array() || taps.size() != static_cast<std::size_t>(c.kernel_size))
          throw MalformedInput("checkpoint: conv_w has the wrong kernel size");
        for (int k = 0; k < c.kernel_size; ++k)
          ckpt.params.conv(f, ch, k, c.input_channels) = number(taps[k]);
      }
    }
    read_vector(p.at("conv_b"), ckpt.params.conv_b, "conv_b");
    read_matrix(p.at("fc1_w"), ckpt.params.fc1_w, "fc1_w");
    read_vector(p.at("fc1_b"), ckpt.params.fc1_b, "fc1_b");
    read_matrix(p.at("fc2_w"), ckpt.params.fc2_w, "fc2_w");
    read_vector(p.at("fc2_b"), ckpt.params.fc2_b, "fc2_b");

    const auto& f = j.at("training_fingerprint");
    auto& fp = ckpt.fingerprint;
    fp.classifier_seed = f.at("seeds").at("classifier").get<std::uint64_t>();
    fp.augment_seed = f.at("seeds").at("augment").get<std::uint64_t>();
    fp.shuffle_seed = f.at("seeds").at("shuffle").get<std::uint64_t>();
    fp.epochs = f.at("epochs").get<int>();
    fp.final_train_loss = f.at("final_train_loss").get<double>();
    fp.best_epoch = f.at("best_epoch").get<int>();
    fp.best_val_accuracy = f.at("best_val_accuracy").get<double>();
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("checkpoint: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint_file(const ModelCheckpoint& ckpt, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  save_checkpoint(ckpt, out);
}

ModelCheckpoint load_checkpoint_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  try {
    return load_checkpoint(in);
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

}  // namespace signface
