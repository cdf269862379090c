#pragma once

// Sequence -> feature tensor transforms and permutation augmentation.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "signface/landmarks.hpp"
#include "signface/nn.hpp"

namespace signface {

inline constexpr int kSequenceLength = 300;
inline constexpr double kDegenerateScale = 1e-9;

/// T x D, row t = x0,y0,x1,y1,... of frame t.
using FeatureTensor = nn::RowMatrix<double>;

using WarningSink = std::function<void(const std::string&)>;

/// Pads with copies of the last frame, or truncates (with a warning) to `length`.
LandmarkSequence pad_to_length(const LandmarkSequence& seq, int length = kSequenceLength,
                               const WarningSink& warn = {});

/// Translates the nose tip to the origin and scales so the mean Euclidean
/// distance from the nose tip to the other points is 1. Frames whose mean
/// distance is <= kDegenerateScale become all zeros.
template <class Derived>
PointMatrix normalize_points(const Eigen::MatrixBase<Derived>& points, int nose_tip_index) {
  PointMatrix centered = points.rowwise() - points.row(nose_tip_index);
  const auto others = static_cast<double>(centered.rows() - 1);
  const double mean = others > 0 ? centered.rowwise().norm().sum() / others : 0.0;
  if (!(mean > kDegenerateScale)) return PointMatrix::Zero(points.rows(), 2);
  return centered / mean;
}

LandmarkFrame normalize_frame(const LandmarkFrame& frame, int nose_tip_index);
LandmarkSequence normalize_sequence(const LandmarkSequence& seq);

/// Splits the frames at `boundaries` (strictly increasing, in 1..T-1) and
/// concatenates the segments in `order`. Throws InvalidSegmentation.
LandmarkSequence permute_segments(const LandmarkSequence& seq, const std::vector<int>& boundaries,
                                  const std::vector<int>& order);

struct AugmentConfig {
  int copies_per_sample = 4;
  int min_segments = 2;
  int max_segments = 5;
  std::uint64_t seed = 0;

  void validate(int length = kSequenceLength) const;
  bool operator==(const AugmentConfig&) const = default;
};

struct SegmentPlan {
  std::vector<int> boundaries;
  std::vector<int> order;

  /// Frame index map: output frame t is input frame frame_map()[t].
  std::vector<int> frame_map(int length) const;
};

/// Draws the segmentation for copy `copy` of sample `sample`. Depends only on
/// (cfg.seed, sample, copy), so samples can be processed in any order.
SegmentPlan draw_segment_plan(const AugmentConfig& cfg, int length, std::uint64_t sample,
                              std::uint64_t copy);

using LabeledSequence = std::pair<LandmarkSequence, SentenceType>;

/// Returns the originals followed by cfg.copies_per_sample permuted variants
/// of each (grouped by original, in input order).
std::vector<LabeledSequence> augment(const std::vector<LabeledSequence>& samples,
                                     const AugmentConfig& cfg);

/// Requires a padded sequence of kSequenceLength frames. Throws ShapeError.
FeatureTensor to_feature_tensor(const LandmarkSequence& seq);

/// Fill absent frames, pad, normalize, flatten: the path every sample takes
/// before reaching the classifier.
FeatureTensor prepare_features(LandmarkSequence seq, const WarningSink& warn = {});

}  // namespace signface
