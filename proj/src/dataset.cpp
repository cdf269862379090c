#include "signface/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "signface/errors.hpp"
#include "signface/rng.hpp"

namespace signface {

using nlohmann::json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

Split split_from_string(std::string_view s) {
  for (auto v : {Split::train, Split::val, Split::unassigned})
    if (to_string(v) == s) return v;
  throw MalformedInput("unknown split '" + std::string(s) + "'");
}

void DatasetManifest::validate() const {
  if (samples.empty()) throw EmptyDataset("manifest has no samples");
  std::set<std::string> seen;
  for (const auto& s : samples)
    if (!seen.insert(s.path).second) throw MalformedInput("duplicate manifest path " + s.path);
}

std::vector<const ManifestEntry*> DatasetManifest::in_split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : samples)
    if (e.split == s) out.push_back(&e);
  return out;
}

std::array<int, kNumClasses> DatasetManifest::class_counts(std::optional<Split> s) const {
  std::array<int, kNumClasses> counts{};
  for (const auto& e : samples)
    if (!s || e.split == *s) ++counts[index_of(e.label)];
  return counts;
}

DatasetManifest manifest_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("manifest: invalid JSON (") + e.what() + ")");
  }
  DatasetManifest m;
  try {
    for (const auto& s : doc.at("samples")) {
      ManifestEntry e;
      e.path = s.at("path").get<std::string>();
      e.label = sentence_type_from_string(s.at("label").get<std::string>());
      e.split = split_from_string(s.value("split", "unassigned"));
      if (s.contains("signer") && !s["signer"].is_null()) e.signer = s["signer"].get<std::string>();
      m.samples.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("manifest: ") + e.what());
  }
  m.validate();
  return m;
}

std::string manifest_to_json(const DatasetManifest& m) {
  nlohmann::ordered_json doc;
  auto samples = nlohmann::ordered_json::array();
  for (const auto& e : m.samples) {
    nlohmann::ordered_json s;
    s["path"] = e.path;
    s["label"] = std::string(to_string(e.label));
    s["split"] = std::string(to_string(e.split));
    if (e.signer) s["signer"] = *e.signer;
    samples.push_back(std::move(s));
  }
  doc["samples"] = std::move(samples);
  return doc.dump(2) + "\n";
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return manifest_from_json(buf.str());
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write manifest " + path.string());
  out << manifest_to_json(m);
  if (!out) throw IoFailure("write failed: " + path.string());
}

namespace {

void check_val_nonempty(const DatasetManifest& m) {
  const auto val = m.class_counts(Split::val);
  for (int k = 0; k < kNumClasses; ++k)
    if (val[k] == 0)
      throw DegenerateSplit("label " + std::string(to_string(SentenceType(k))) +
                            " has no validation samples");
}

}  // namespace

DatasetManifest split_dataset(const DatasetManifest& manifest,
                              std::optional<double> train_fraction, std::uint64_t seed) {
  manifest.validate();
  DatasetManifest out = manifest;
  if (!train_fraction) {
    for (const auto& e : out.samples)
      if (e.split == Split::unassigned)
        throw ConfigError("sample " + e.path + " has no split and no train fraction was given");
    return out;
  }
  if (!(*train_fraction > 0.0 && *train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1");

  for (const auto& e : out.samples)
    if (e.split != Split::unassigned)
      throw ConfigError("sample " + e.path + " is already assigned a split");

  for (int k = 0; k < kNumClasses; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
      if (index_of(out.samples[i].label) == k) members.push_back(i);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    rng.shuffle(members.begin(), members.end());
    const auto n_train =
        static_cast<std::size_t>(std::floor(*train_fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < members.size(); ++j)
      out.samples[members[j]].split = j < n_train ? Split::train : Split::val;
  }
  check_val_nonempty(out);
  return out;
}

DatasetManifest assign_split_counts(const DatasetManifest& manifest,
                                    const std::array<int, kNumClasses>& train_counts) {
  manifest.validate();
  DatasetManifest out = manifest;
  const auto total = out.class_counts();
  for (int k = 0; k < kNumClasses; ++k)
    if (train_counts[k] < 0 || train_counts[k] > total[k])
      throw ConfigError("train count for " + std::string(to_string(SentenceType(k))) +
                        " exceeds the " + std::to_string(total[k]) + " available samples");
  std::array<int, kNumClasses> taken{};
  for (auto& e : out.samples) {
    const int k = index_of(e.label);
    e.split = taken[k]++ < train_counts[k] ? Split::train : Split::val;
  }
  check_val_nonempty(out);
  return out;
}

}  // namespace signface
