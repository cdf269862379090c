#include "signface/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "signface/errors.hpp"

namespace signface {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

std::array<int, kNumClasses> read_counts(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != kNumClasses)
    throw ConfigError("config key '" + where + "' must be an array of 3 integers");
  std::array<int, kNumClasses> out{};
  for (int k = 0; k < kNumClasses; ++k) {
    if (!v[k].is_number_integer()) throw ConfigError("config key '" + where + "' must hold integers");
    out[k] = v[k].get<int>();
  }
  return out;
}

}  // namespace

CliConfig parse_cli_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
  }
  CliConfig cfg;
  check_keys(doc, "config", {"train", "synth", "split", "paths"});

  if (doc.contains("train")) {
    const auto& t = doc["train"];
    check_keys(t, "train",
               {"epochs", "batch_size", "learning_rate", "shuffle_seed", "classifier", "augment"});
    read(t, "epochs", cfg.train.epochs, "train");
    read(t, "batch_size", cfg.train.batch_size, "train");
    read(t, "learning_rate", cfg.train.learning_rate, "train");
    read(t, "shuffle_seed", cfg.train.shuffle_seed, "train");
    if (t.contains("classifier")) {
      const auto& c = t["classifier"];
      check_keys(c, "train.classifier", {"conv_filters", "kernel_size", "hidden_units", "seed"});
      read(c, "conv_filters", cfg.train.classifier.conv_filters, "train.classifier");
      read(c, "kernel_size", cfg.train.classifier.kernel_size, "train.classifier");
      read(c, "hidden_units", cfg.train.classifier.hidden_units, "train.classifier");
      read(c, "seed", cfg.train.classifier.seed, "train.classifier");
    }
    if (t.contains("augment")) {
      const auto& a = t["augment"];
      check_keys(a, "train.augment", {"copies_per_sample", "min_segments", "max_segments", "seed"});
      read(a, "copies_per_sample", cfg.train.augment.copies_per_sample, "train.augment");
      read(a, "min_segments", cfg.train.augment.min_segments, "train.augment");
      read(a, "max_segments", cfg.train.augment.max_segments, "train.augment");
      read(a, "seed", cfg.train.augment.seed, "train.augment");
    }
  }

  if (doc.contains("synth")) {
    const auto& s = doc["synth"];
    check_keys(s, "synth",
               {"profile", "counts", "min_frames", "max_frames", "noise_sigma",
                "expression_amplitude", "shake_frequency", "seed"});
    if (s.contains("profile")) {
      std::string id;
      read(s, "profile", id, "synth");
      cfg.synth.profile = profile_by_id(id);
    }
    if (s.contains("counts")) cfg.synth.counts = read_counts(s["counts"], "synth.counts");
    read(s, "min_frames", cfg.synth.min_frames, "synth");
    read(s, "max_frames", cfg.synth.max_frames, "synth");
    read(s, "noise_sigma", cfg.synth.noise_sigma, "synth");
    read(s, "expression_amplitude", cfg.synth.expression_amplitude, "synth");
    read(s, "shake_frequency", cfg.synth.shake_frequency, "synth");
    read(s, "seed", cfg.synth.seed, "synth");
  }

  if (doc.contains("split")) {
    const auto& s = doc["split"];
    check_keys(s, "split", {"train_counts", "train_fraction", "seed"});
    if (s.contains("train_counts")) cfg.split.train_counts = read_counts(s["train_counts"], "split.train_counts");
    if (s.contains("train_fraction")) {
      double f = 0;
      read(s, "train_fraction", f, "split");
      cfg.split.train_fraction = f;
    }
    read(s, "seed", cfg.split.seed, "split");
    if (cfg.split.train_counts && cfg.split.train_fraction)
      throw ConfigError("split: give either train_counts or train_fraction, not both");
  }

  if (doc.contains("paths")) {
    const auto& p = doc["paths"];
    check_keys(p, "paths", {"data_root", "manifest", "run_dir"});
    auto opt = [&](const char* key, std::optional<std::string>& out) {
      std::string v;
      if (p.contains(key)) {
        read(p, key, v, "paths");
        out = v;
      }
    };
    opt("data_root", cfg.paths.data_root);
    opt("manifest", cfg.paths.manifest);
    opt("run_dir", cfg.paths.run_dir);
  }

  cfg.synth.validate();
  if (cfg.train.epochs < 1 || cfg.train.batch_size < 1 || !(cfg.train.learning_rate > 0))
    throw ConfigError("train: epochs and batch_size must be >= 1, learning_rate > 0");
  cfg.train.augment.validate();
  return cfg;
}

CliConfig load_cli_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_cli_config(buf.str());
}

std::string cli_config_to_json(const CliConfig& cfg) {
  nlohmann::ordered_json j;
  const auto& t = cfg.train;
  j["train"]["epochs"] = t.epochs;
  j["train"]["batch_size"] = t.batch_size;
  j["train"]["learning_rate"] = t.learning_rate;
  j["train"]["shuffle_seed"] = t.shuffle_seed;
  j["train"]["classifier"]["conv_filters"] = t.classifier.conv_filters;
  j["train"]["classifier"]["kernel_size"] = t.classifier.kernel_size;
  j["train"]["classifier"]["hidden_units"] = t.classifier.hidden_units;
  j["train"]["classifier"]["seed"] = t.classifier.seed;
  j["train"]["augment"]["copies_per_sample"] = t.augment.copies_per_sample;
  j["train"]["augment"]["min_segments"] = t.augment.min_segments;
  j["train"]["augment"]["max_segments"] = t.augment.max_segments;
  j["train"]["augment"]["seed"] = t.augment.seed;
  const auto& s = cfg.synth;
  j["synth"]["profile"] = std::string(s.profile.id());
  j["synth"]["counts"] = s.counts;
  j["synth"]["min_frames"] = s.min_frames;
  j["synth"]["max_frames"] = s.max_frames;
  j["synth"]["noise_sigma"] = s.noise_sigma;
  j["synth"]["expression_amplitude"] = s.expression_amplitude;
  j["synth"]["shake_frequency"] = s.shake_frequency;
  j["synth"]["seed"] = s.seed;
  j["split"] = nlohmann::ordered_json::object();
  if (cfg.split.train_counts) j["split"]["train_counts"] = *cfg.split.train_counts;
  if (cfg.split.train_fraction) j["split"]["train_fraction"] = *cfg.split.train_fraction;
  j["split"]["seed"] = cfg.split.seed;
  j["paths"] = nlohmann::ordered_json::object();
  if (cfg.paths.data_root) j["paths"]["data_root"] = *cfg.paths.data_root;
  if (cfg.paths.manifest) j["paths"]["manifest"] = *cfg.paths.manifest;
  if (cfg.paths.run_dir) j["paths"]["run_dir"] = *cfg.paths.run_dir;
  return j.dump(2) + "\n";
}

}  // namespace signface
