#include <doctest.h>

#include "signface/dataset.hpp"
#include "signface/errors.hpp"

using namespace signface;

namespace {

DatasetManifest balanced(int per_class) {
  DatasetManifest m;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < per_class; ++i)
      m.samples.push_back({std::to_string(k) + "_" + std::to_string(i) + ".jsonl", SentenceType(k),
                           Split::unassigned, std::nullopt});
  return m;
}

}  // namespace

TEST_CASE("stratified fraction split") {
  const auto m = split_dataset(balanced(126), 0.8, 5);
  CHECK(m.in_split(Split::train).size() == 300);
  CHECK(m.in_split(Split::val).size() == 78);
  CHECK(m.class_counts(Split::train) == std::array{100, 100, 100});
  CHECK(m.class_counts(Split::val) == std::array{26, 26, 26});
  CHECK(split_dataset(balanced(126), 0.8, 5) == m);
  CHECK_FALSE(split_dataset(balanced(126), 0.8, 6) == m);
}

TEST_CASE("explicit counts give 302 / 76") {
  const auto m = assign_split_counts(balanced(126), {101, 101, 100});
  CHECK(m.in_split(Split::train).size() == 302);
  CHECK(m.in_split(Split::val).size() == 76);
  CHECK(m.class_counts(Split::val) == std::array{25, 25, 26});
  CHECK(m.samples[0].split == Split::train);
  CHECK(m.samples[125].split == Split::val);
  CHECK_THROWS_AS(assign_split_counts(balanced(5), {6, 1, 1}), ConfigError);
  CHECK_THROWS_AS(assign_split_counts(balanced(5), {5, 1, 1}), DegenerateSplit);
}

TEST_CASE("split errors") {
  const auto tight = split_dataset(balanced(10), 0.999, 0);
  CHECK(tight.class_counts(Split::val) == std::array{1, 1, 1});
  auto two_labels = balanced(10);
  std::erase_if(two_labels.samples, [](const ManifestEntry& e) { return e.label == SentenceType::wh_question; });
  CHECK_THROWS_AS(split_dataset(two_labels, 0.5, 0), DegenerateSplit);
  CHECK_THROWS_AS(assign_split_counts(two_labels, {5, 5, 0}), DegenerateSplit);
  CHECK_THROWS_AS(split_dataset(balanced(10), 1.0, 0), ConfigError);
  CHECK_THROWS_AS(split_dataset(balanced(10), 0.0, 0), ConfigError);
  CHECK_THROWS_AS(split_dataset(balanced(10), std::nullopt, 0), ConfigError);
  CHECK_THROWS_AS(split_dataset(DatasetManifest{}, 0.5, 0), EmptyDataset);
  const auto done = split_dataset(balanced(10), 0.5, 0);
  CHECK(split_dataset(done, std::nullopt, 0) == done);
  CHECK_THROWS_AS(split_dataset(done, 0.5, 0), ConfigError);
}

TEST_CASE("manifest json round trip") {
  auto m = split_dataset(balanced(4), 0.5, 1);
  m.samples[2].signer = "s07";
  CHECK(manifest_from_json(manifest_to_json(m)) == m);
  CHECK_THROWS_AS(manifest_from_json("{"), MalformedInput);
  CHECK_THROWS_AS(manifest_from_json(R"({"samples":[{"path":"a","label":"maybe"}]})"),
                  MalformedInput);
  CHECK_THROWS_AS(
      manifest_from_json(R"({"samples":[{"path":"a","label":"affirmative"},{"path":"a","label":"affirmative"}]})"),
      MalformedInput);
  CHECK_THROWS_AS(manifest_from_json(R"({"samples":[]})"), EmptyDataset);
  CHECK(manifest_from_json(R"({"samples":[{"path":"a","label":"wh_question"}]})").samples[0].split ==
        Split::unassigned);
}
