#pragma once

// Class-conditional synthetic landmark sequences.
//
// A fixture for exercising the pipeline end to end, not a model of signing.
// Each class perturbs a neutral schematic face:
//   affirmative      noise only
//   yes_no_question  eyebrows raised and jaw pulled toward the nose, ramping
//                    in over the final third of the clip
//   wh_question      whole face shaken horizontally (sinusoid) with eyebrows
//                    lowered throughout
// Coordinates are emitted "pixel-like": face units x 100, nose near (320, 240).

#include <array>
#include <cstdint>
#include <filesystem>

#include "signface/dataset.hpp"
#include "signface/landmarks.hpp"

namespace signface {

inline constexpr double kSynthFps = 30.0;
inline constexpr double kSynthPixelScale = 100.0;
inline const Point2 kSynthOrigin{320.0, 240.0};

/// Half-open index range [first, last).
struct IndexRange {
  int first = 0;
  int last = 0;
  bool contains(int i) const { return i >= first && i < last; }
};

/// Landmark groups used by the generator. openpose70 and dlib68 follow the
/// 68-point iBUG layout (openpose adds the two pupils at 68, 69); mediapipe468
/// uses a schematic block layout with the nose tip at index 1.
struct FaceGroups {
  IndexRange jaw;
  IndexRange brows;
  IndexRange nose;
  IndexRange eyes;
  IndexRange mouth;
};

FaceGroups face_groups(const DetectorProfile& profile);

struct SynthConfig {
  DetectorProfile profile = openpose70();
  std::array<int, kNumClasses> counts{126, 126, 126};
  int min_frames = 60;
  int max_frames = 300;
  double noise_sigma = 0.02;
  double expression_amplitude = 0.15;
  double shake_frequency = 1.5;  // Hz at kSynthFps
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

/// Neutral face in face units: nose tip at the origin, mean distance from the
/// nose tip to the other points exactly 1 (up to rounding).
LandmarkFrame neutral_face_template(const DetectorProfile& profile);

/// Maps face units to the emitted pixel-like coordinates.
PointMatrix to_pixels(const PointMatrix& face_units);

LandmarkSequence generate_sample(SentenceType cls, const SynthConfig& cfg, std::uint64_t index);

/// Writes `<label>_<index>.jsonl` files plus manifest.json (all unassigned)
/// into out_dir and returns the manifest. Throws EmptyDataset, IoFailure.
DatasetManifest generate_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace signface
