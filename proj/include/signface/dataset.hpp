#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "signface/landmarks.hpp"

namespace signface {

enum class Split { train, val, unassigned };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct ManifestEntry {
  std::string path;  // relative to the data root
  SentenceType label = SentenceType::affirmative;
  Split split = Split::unassigned;
  std::optional<std::string> signer;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> samples;

  /// Unique paths and at least one sample. Throws MalformedInput / EmptyDataset.
  void validate() const;
  std::vector<const ManifestEntry*> in_split(Split s) const;
  std::array<int, kNumClasses> class_counts(std::optional<Split> s = std::nullopt) const;

  bool operator==(const DatasetManifest&) const = default;
};

DatasetManifest manifest_from_json(std::string_view text);
std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);

/// Stratified split: for each label, floor(train_fraction * count) samples
/// (chosen by `seed`) go to train, the rest to val. Every sample must be
/// unassigned. Without a fraction, the existing assignment is kept and must be
/// complete. Throws DegenerateSplit if any of the three labels ends up with no val sample
/// (including a label with no samples at all).
DatasetManifest split_dataset(const DatasetManifest& manifest,
                              std::optional<double> train_fraction, std::uint64_t seed);

/// Explicit assignment: the first train_counts[k] samples of label k (in
/// manifest order) go to train, the remainder to val.
DatasetManifest assign_split_counts(const DatasetManifest& manifest,
                                    const std::array<int, kNumClasses>& train_counts);

}  // namespace signface
