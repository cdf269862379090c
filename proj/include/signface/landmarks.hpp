#pragma once

// Landmark domain types shared by every stage of the pipeline.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace signface {

using Point2 = Eigen::Vector2d;

/// N x 2 row-major: the memory of row i is (x_i, y_i), so a frame flattens to
/// x0,y0,x1,y1,... without copying.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

enum class ProfileName { openpose70, mediapipe468, dlib68 };

struct DetectorProfile {
  ProfileName name = ProfileName::openpose70;
  int landmark_count = 70;
  int nose_tip_index = 30;

  int feature_dim() const { return 2 * landmark_count; }
  std::string_view id() const;

  bool operator==(const DetectorProfile&) const = default;
};

DetectorProfile openpose70();
DetectorProfile mediapipe468();
DetectorProfile dlib68();

/// Looks up a built-in profile by its id ("openpose70", ...). Throws ConfigError.
DetectorProfile profile_by_id(std::string_view id);

struct LandmarkFrame {
  PointMatrix points;
  bool absent = false;

  static LandmarkFrame zeros(int landmark_count, bool absent = false) {
    return {PointMatrix::Zero(landmark_count, 2), absent};
  }
  Point2 point(int i) const { return points.row(i).transpose(); }

  bool operator==(const LandmarkFrame& o) const {
    return absent == o.absent && points.rows() == o.points.rows() && points == o.points;
  }
};

struct LandmarkSequence {
  DetectorProfile profile;
  std::optional<double> fps;
  std::vector<LandmarkFrame> frames;

  int length() const { return static_cast<int>(frames.size()); }

  /// Throws MalformedInput / EmptySequence when an invariant is broken.
  void validate() const;

  bool operator==(const LandmarkSequence&) const = default;
};

enum class SentenceType : int { affirmative = 0, yes_no_question = 1, wh_question = 2 };

inline constexpr int kNumClasses = 3;

std::string_view to_string(SentenceType t);
/// Throws MalformedInput for an unknown label.
SentenceType sentence_type_from_string(std::string_view s);
SentenceType sentence_type_from_index(int i);
inline int index_of(SentenceType t) { return static_cast<int>(t); }

}  // namespace signface
