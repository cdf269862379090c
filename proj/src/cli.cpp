#include "signface/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "signface/config.hpp"
#include "signface/errors.hpp"
#include "signface/formats.hpp"

namespace signface {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitUsage = 3;

int exit_code_for(const Error& e) {
  const auto& k = e.kind();
  if (k == "ConfigError" || k == "ProfileMismatch" || k == "DegenerateSplit") return kExitUsage;
  return kExitData;
}

std::array<int, kNumClasses> parse_counts(const std::vector<int>& v, const char* flag) {
  if (v.size() != kNumClasses)
    throw ConfigError(std::string(flag) + " needs exactly 3 comma-separated integers");
  return {v[0], v[1], v[2]};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << text;
  if (!out) throw IoFailure("write failed: " + path.string());
}

std::string require(const std::optional<std::string>& v, const char* what) {
  if (!v || v->empty()) throw ConfigError(std::string("missing ") + what);
  return *v;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentence-type classification from facial landmark sequences", "signface"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON experiment config (flags override it)");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert OpenPose JSON or CSV to canonical JSONL");
  std::string conv_input, conv_format, conv_profile = "openpose70", conv_output;
  std::optional<double> conv_fps;
  convert->add_option("--input-dir,--input", conv_input, "OpenPose frame directory or CSV file")
      ->required();
  convert->add_option("--format", conv_format, "openpose | csv")
      ->required()
      ->check(CLI::IsMember({"openpose", "csv"}));
  convert->add_option("--profile", conv_profile, "openpose70 | mediapipe468 | dlib68");
  convert->add_option("--fps", conv_fps, "Frame rate to record in the header");
  convert->add_option("--output", conv_output, "Canonical JSONL output")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::optional<std::string> synth_out, synth_profile;
  std::vector<int> synth_counts, synth_train_counts;
  std::optional<double> synth_noise, synth_fraction;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--out-dir", synth_out, "Output directory");
  synth->add_option("--profile", synth_profile, "Detector profile");
  synth->add_option("--counts", synth_counts, "Samples per class, e.g. 126,126,126")->delimiter(',');
  synth->add_option("--noise-sigma", synth_noise, "Landmark noise in face units");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--train-counts", synth_train_counts, "Assign the first N per class to train")
      ->delimiter(',');
  synth->add_option("--train-fraction", synth_fraction, "Stratified random split fraction");

  // split
  auto* split = app.add_subcommand("split", "Assign train/val splits in a manifest");
  std::string split_manifest, split_output;
  std::vector<int> split_counts;
  std::optional<double> split_fraction;
  std::optional<std::uint64_t> split_seed;
  split->add_option("--manifest", split_manifest, "Input manifest")->required();
  split->add_option("--output", split_output, "Output manifest")->required();
  split->add_option("--train-counts", split_counts, "First N per class go to train")->delimiter(',');
  split->add_option("--train-fraction", split_fraction, "Stratified random split fraction");
  split->add_option("--seed", split_seed, "Split seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  std::optional<std::string> train_manifest, train_root, train_run;
  std::optional<int> train_epochs, train_batch;
  std::optional<double> train_lr;
  std::optional<std::uint64_t> train_seed;
  train_cmd->add_option("--manifest", train_manifest, "Dataset manifest");
  train_cmd->add_option("--data-root", train_root, "Directory the manifest paths are relative to");
  train_cmd->add_option("--out-dir,--run-dir", train_run, "Where checkpoint.json and history.json go");
  train_cmd->add_option("--epochs", train_epochs);
  train_cmd->add_option("--batch-size", train_batch);
  train_cmd->add_option("--learning-rate", train_lr);
  train_cmd->add_option("--seed", train_seed, "Sets classifier, augment and shuffle seeds");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest split");
  std::string eval_ckpt, eval_split = "val";
  std::optional<std::string> eval_manifest, eval_root, eval_output;
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--manifest", eval_manifest);
  eval_cmd->add_option("--data-root", eval_root);
  eval_cmd->add_option("--split", eval_split)->check(CLI::IsMember({"train", "val"}));
  eval_cmd->add_option("--output", eval_output, "EvalReport JSON path");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Classify canonical JSONL sequences");
  std::string pred_ckpt;
  std::vector<std::string> pred_inputs;
  predict_cmd->add_option("--checkpoint", pred_ckpt)->required();
  predict_cmd->add_option("inputs", pred_inputs, "Canonical JSONL files")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const WarningSink warn = [&err](const std::string& msg) { err << "warning: " << msg << "\n"; };

  try {
    CliConfig cfg = config_path.empty() ? CliConfig{} : load_cli_config(config_path);
    auto manifest_dir = [](const std::string& m) { return fs::path(m).parent_path(); };

    if (*convert) {
      const auto profile = profile_by_id(conv_profile);
      LandmarkSequence seq;
      if (conv_format == "openpose") {
        LoadStats stats;
        seq = load_sequence_openpose(conv_input, profile, conv_fps, &stats);
        if (stats.filled > 0)
          warn(std::to_string(stats.filled) + " of " + std::to_string(stats.files) +
               " frames had no face and were filled from a neighbour");
      } else {
        std::ifstream in(conv_input, std::ios::binary);
        if (!in) throw IoFailure("cannot open " + conv_input);
        try {
          seq = read_csv_sequence(in, profile);
        } catch (const MalformedInput& e) {
          throw MalformedInput(conv_input + ": " + e.what());
        }
        seq.fps = conv_fps;
      }
      if (seq.length() > kSequenceLength)
        warn("sequence has " + std::to_string(seq.length()) + " frames; training and prediction use the first " +
             std::to_string(kSequenceLength));
      write_canonical_file(seq, conv_output);
      err << "wrote " << seq.length() << " frames to " << conv_output << "\n";
      return kExitOk;
    }

    if (*synth) {
      if (synth_profile) cfg.synth.profile = profile_by_id(*synth_profile);
      if (!synth_counts.empty()) cfg.synth.counts = parse_counts(synth_counts, "--counts");
      if (synth_noise) cfg.synth.noise_sigma = *synth_noise;
      if (synth_seed) cfg.synth.seed = *synth_seed;
      if (!synth_train_counts.empty()) {
        cfg.split.train_counts = parse_counts(synth_train_counts, "--train-counts");
        cfg.split.train_fraction.reset();
      }
      if (synth_fraction) {
        cfg.split.train_fraction = synth_fraction;
        cfg.split.train_counts.reset();
      }
      cfg.synth.validate();
      const fs::path dir = synth_out ? *synth_out : require(cfg.paths.data_root, "--out-dir");
      auto manifest = generate_dataset(cfg.synth, dir);
      if (cfg.split.train_counts)
        manifest = assign_split_counts(manifest, *cfg.split.train_counts);
      else if (cfg.split.train_fraction)
        manifest = split_dataset(manifest, cfg.split.train_fraction, cfg.split.seed);
      write_manifest(manifest, dir / "manifest.json");
      const auto tr = manifest.in_split(Split::train).size();
      const auto va = manifest.in_split(Split::val).size();
      err << "wrote " << manifest.samples.size() << " samples to " << dir.string() << " (train "
          << tr << ", val " << va << ")\n";
      return kExitOk;
    }

    if (*split) {
      auto manifest = read_manifest(split_manifest);
      if (!split_counts.empty())
        manifest = assign_split_counts(manifest, parse_counts(split_counts, "--train-counts"));
      else if (split_fraction || cfg.split.train_fraction)
        manifest = split_dataset(manifest, split_fraction ? split_fraction : cfg.split.train_fraction,
                                 split_seed.value_or(cfg.split.seed));
      else if (cfg.split.train_counts)
        manifest = assign_split_counts(manifest, *cfg.split.train_counts);
      else
        throw ConfigError("split needs --train-counts or --train-fraction");
      write_manifest(manifest, split_output);
      return kExitOk;
    }

    if (*train_cmd) {
      auto& t = cfg.train;
      if (train_epochs) t.epochs = *train_epochs;
      if (train_batch) t.batch_size = *train_batch;
      if (train_lr) t.learning_rate = *train_lr;
      if (train_seed) t.classifier.seed = t.augment.seed = t.shuffle_seed = *train_seed;
      const std::string manifest_path = train_manifest ? *train_manifest
                                                        : require(cfg.paths.manifest, "--manifest");
      const fs::path root = train_root       ? fs::path(*train_root)
                            : cfg.paths.data_root ? fs::path(*cfg.paths.data_root)
                                                  : manifest_dir(manifest_path);
      const fs::path run = train_run ? *train_run : require(cfg.paths.run_dir, "--out-dir");
      const auto manifest = read_manifest(manifest_path);

      const auto started = std::chrono::steady_clock::now();
      const auto result = train(
          manifest, t, root,
          [&err](const EpochRecord& r) {
            err << "epoch " << r.epoch << "  train_loss " << r.train_loss << "  val_accuracy "
                << r.val_accuracy << "\n";
          },
          warn);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

      std::error_code ec;
      fs::create_directories(run, ec);
      if (ec) throw IoFailure("cannot create " + run.string());
      save_checkpoint_file(result.checkpoint, run / "checkpoint.json");
      write_text(run / "history.json", history_to_json(result.history));
      err << "best epoch " << result.checkpoint.fingerprint.best_epoch << " (val accuracy "
          << result.checkpoint.fingerprint.best_val_accuracy << "), " << secs << " s\n";
      return kExitOk;
    }

    if (*eval_cmd) {
      const auto ckpt = load_checkpoint_file(eval_ckpt);
      const std::string manifest_path = eval_manifest ? *eval_manifest
                                                      : require(cfg.paths.manifest, "--manifest");
      const fs::path root = eval_root       ? fs::path(*eval_root)
                            : cfg.paths.data_root ? fs::path(*cfg.paths.data_root)
                                                  : manifest_dir(manifest_path);
      const auto split_value = split_from_string(eval_split);
      const auto report = evaluate(ckpt, read_manifest(manifest_path), split_value, root, warn);
      const fs::path report_path =
          eval_output ? fs::path(*eval_output)
                      : fs::path(eval_ckpt).parent_path() / ("eval_" + eval_split + ".json");
      write_text(report_path, report_to_json(report));
      out << format_report_table(report, std::string(ckpt.profile.id()) + " / " + eval_split);
      return kExitOk;
    }

    if (*predict_cmd) {
      const auto ckpt = load_checkpoint_file(pred_ckpt);
      for (const auto& input : pred_inputs) {
        const auto p = predict(ckpt, read_canonical_file(input), warn);
        nlohmann::ordered_json j;
        j["path"] = input;
        j["label"] = std::string(to_string(p.label));
        j["probabilities"] = p.probabilities;
        out << j.dump() << "\n";
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace signface
