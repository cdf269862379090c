#include "signface/landmarks.hpp"

#include <cmath>

#include "signface/errors.hpp"

namespace signface {

std::string_view DetectorProfile::id() const {
  switch (name) {
    case ProfileName::openpose70: return "openpose70";
    case ProfileName::mediapipe468: return "mediapipe468";
    case ProfileName::dlib68: return "dlib68";
  }
  return "unknown";
}

DetectorProfile openpose70() { return {ProfileName::openpose70, 70, 30}; }
// Index 1 is the nose-tip vertex of the 468-point face mesh.
DetectorProfile mediapipe468() { return {ProfileName::mediapipe468, 468, 1}; }
DetectorProfile dlib68() { return {ProfileName::dlib68, 68, 30}; }

DetectorProfile profile_by_id(std::string_view id) {
  for (auto p : {openpose70(), mediapipe468(), dlib68()})
    if (p.id() == id) return p;
  throw ConfigError("unknown detector profile '" + std::string(id) +
                    "' (expected openpose70, mediapipe468 or dlib68)");
}

void LandmarkSequence::validate() const {
  if (frames.empty()) throw EmptySequence("sequence has no frames");
  bool any_present = false;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& f = frames[t];
    if (f.points.rows() != profile.landmark_count)
      throw MalformedInput("frame " + std::to_string(t) + " has " +
                           std::to_string(f.points.rows()) + " points, profile " +
                           std::string(profile.id()) + " expects " +
                           std::to_string(profile.landmark_count));
    if (!f.points.allFinite())
      throw MalformedInput("frame " + std::to_string(t) + " has a non-finite coordinate");
    if (f.absent && !f.points.isZero(0.0))
      throw MalformedInput("frame " + std::to_string(t) + " is absent but has nonzero points");
    any_present = any_present || !f.absent;
  }
  if (!any_present) throw EmptySequence("every frame is absent (no face detected)");
}

std::string_view to_string(SentenceType t) {
  switch (t) {
    case SentenceType::affirmative: return "affirmative";
    case SentenceType::yes_no_question: return "yes_no_question";
    case SentenceType::wh_question: return "wh_question";
  }
  return "unknown";
}

SentenceType sentence_type_from_string(std::string_view s) {
  for (int i = 0; i < kNumClasses; ++i)
    if (to_string(SentenceType(i)) == s) return SentenceType(i);
  throw MalformedInput("unknown sentence type label '" + std::string(s) + "'");
}

SentenceType sentence_type_from_index(int i) {
  if (i < 0 || i >= kNumClasses) throw MalformedInput("class index out of range");
  return SentenceType(i);
}

}  // namespace signface
