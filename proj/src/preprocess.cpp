#include "signface/preprocess.hpp"

#include <algorithm>
#include <numeric>

#include "signface/errors.hpp"
#include "signface/formats.hpp"
#include "signface/rng.hpp"

namespace signface {

LandmarkSequence pad_to_length(const LandmarkSequence& seq, int length, const WarningSink& warn) {
  if (length < 1) throw ConfigError("pad_to_length: length must be >= 1");
  if (seq.frames.empty()) throw EmptySequence("pad_to_length: sequence has no frames");
  LandmarkSequence out{seq.profile, seq.fps, {}};
  const int n = seq.length();
  if (n > length && warn)
    warn("sequence has " + std::to_string(n) + " frames; truncated to " +
         std::to_string(length));
  const int kept = std::min(n, length);
  out.frames.reserve(length);
  out.frames.assign(seq.frames.begin(), seq.frames.begin() + kept);
  out.frames.resize(length, seq.frames[kept - 1]);
  return out;
}

LandmarkFrame normalize_frame(const LandmarkFrame& frame, int nose_tip_index) {
  if (nose_tip_index < 0 || nose_tip_index >= frame.points.rows())
    throw ShapeError("normalize_frame: nose tip index out of range");
  return {normalize_points(frame.points, nose_tip_index), frame.absent};
}

LandmarkSequence normalize_sequence(const LandmarkSequence& seq) {
  LandmarkSequence out{seq.profile, seq.fps, {}};
  out.frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.frames.push_back(normalize_frame(f, seq.profile.nose_tip_index));
  return out;
}

namespace {

void check_plan(const std::vector<int>& boundaries, const std::vector<int>& order, int length) {
  int prev = 0;
  for (int b : boundaries) {
    if (b <= prev || b >= length)
      throw InvalidSegmentation("boundaries must be strictly increasing within 1.." +
                                std::to_string(length - 1));
    prev = b;
  }
  const std::size_t segments = boundaries.size() + 1;
  if (order.size() != segments)
    throw InvalidSegmentation("order has " + std::to_string(order.size()) + " entries for " +
                              std::to_string(segments) + " segments");
  std::vector<bool> seen(segments, false);
  for (int o : order) {
    if (o < 0 || static_cast<std::size_t>(o) >= segments || seen[o])
      throw InvalidSegmentation("order is not a permutation of the segments");
    seen[o] = true;
  }
}

}  // namespace

std::vector<int> SegmentPlan::frame_map(int length) const {
  check_plan(boundaries, order, length);
  std::vector<int> starts{0};
  starts.insert(starts.end(), boundaries.begin(), boundaries.end());
  starts.push_back(length);
  std::vector<int> map;
  map.reserve(length);
  for (int s : order)
    for (int t = starts[s]; t < starts[s + 1]; ++t) map.push_back(t);
  return map;
}

LandmarkSequence permute_segments(const LandmarkSequence& seq, const std::vector<int>& boundaries,
                                  const std::vector<int>& order) {
  const auto map = SegmentPlan{boundaries, order}.frame_map(seq.length());
  LandmarkSequence out{seq.profile, seq.fps, {}};
  out.frames.reserve(map.size());
  for (int t : map) out.frames.push_back(seq.frames[t]);
  return out;
}

void AugmentConfig::validate(int length) const {
  if (copies_per_sample < 0) throw ConfigError("augment: copies_per_sample must be >= 0");
  if (min_segments < 1) throw ConfigError("augment: min_segments must be >= 1");
  if (max_segments < min_segments)
    throw ConfigError("augment: max_segments must be >= min_segments");
  if (max_segments > length) throw ConfigError("augment: max_segments exceeds sequence length");
}

SegmentPlan draw_segment_plan(const AugmentConfig& cfg, int length, std::uint64_t sample,
                              std::uint64_t copy) {
  cfg.validate(length);
  Rng rng(derive_seed(cfg.seed, {sample, copy}));
  const int k = static_cast<int>(rng.between(cfg.min_segments, cfg.max_segments));

  // k-1 distinct cut points from 1..length-1: partial Fisher-Yates.
  std::vector<int> pool(length - 1);
  std::iota(pool.begin(), pool.end(), 1);
  SegmentPlan plan;
  for (int i = 0; i < k - 1; ++i) {
    const auto j = i + static_cast<int>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    plan.boundaries.push_back(pool[i]);
  }
  std::sort(plan.boundaries.begin(), plan.boundaries.end());

  plan.order.resize(k);
  std::iota(plan.order.begin(), plan.order.end(), 0);
  rng.shuffle(plan.order.begin(), plan.order.end());
  return plan;
}

std::vector<LabeledSequence> augment(const std::vector<LabeledSequence>& samples,
                                     const AugmentConfig& cfg) {
  std::vector<LabeledSequence> out(samples.begin(), samples.end());
  if (cfg.copies_per_sample == 0) return out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [seq, label] = samples[i];
    for (int c = 0; c < cfg.copies_per_sample; ++c) {
      const auto plan = draw_segment_plan(cfg, seq.length(), i, static_cast<std::uint64_t>(c));
      out.emplace_back(permute_segments(seq, plan.boundaries, plan.order), label);
    }
  }
  return out;
}

FeatureTensor to_feature_tensor(const LandmarkSequence& seq) {
  if (seq.length() != kSequenceLength)
    throw ShapeError("to_feature_tensor: sequence has " + std::to_string(seq.length()) +
                     " frames, expected " + std::to_string(kSequenceLength) + " (pad first)");
  const int dim = seq.profile.feature_dim();
  FeatureTensor x(kSequenceLength, dim);
  for (int t = 0; t < kSequenceLength; ++t) {
    const auto& pts = seq.frames[t].points;
    if (pts.rows() != seq.profile.landmark_count)
      throw ShapeError("to_feature_tensor: frame " + std::to_string(t) +
                       " does not match the profile");
    x.row(t) = Eigen::Map<const Eigen::RowVectorXd>(pts.data(), dim);
  }
  return x;
}

FeatureTensor prepare_features(LandmarkSequence seq, const WarningSink& warn) {
  fill_absent_frames(seq);
  return to_feature_tensor(normalize_sequence(pad_to_length(seq, kSequenceLength, warn)));
}

}  // namespace signface
