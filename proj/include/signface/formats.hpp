#pragma once

// Readers and writers for landmark files.
//
//  * OpenPose per-frame JSON: `people[0].face_keypoints_2d` holds
//    (x, y, confidence) x landmark_count. Confidence is dropped.
//  * Canonical JSONL: one header line
//      {"type":"header","profile":"openpose70","fps":30.0,"landmarks":70}
//    then one line per frame
//      {"type":"frame","index":0,"points":[[x,y],...]}
//    with indices 0..T-1 in order. A frame without a detected face carries
//    "absent":true and zero (or no) points.
//  * CSV: one row per frame, columns x0,y0,x1,y1,... with an optional header.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "signface/landmarks.hpp"

namespace signface {

LandmarkFrame parse_openpose_frame(std::string_view json_text, const DetectorProfile& profile);

struct LoadStats {
  std::size_t files = 0;
  std::size_t filled = 0;  // absent frames replaced by a neighbour
};

/// Reads every `*_<index>_keypoints.json` in `dir`, ordered by index, and
/// fills frames without a face (see fill_absent_frames).
LandmarkSequence load_sequence_openpose(const std::filesystem::path& dir,
                                        const DetectorProfile& profile,
                                        std::optional<double> fps = std::nullopt,
                                        LoadStats* stats = nullptr);

/// Replaces each absent frame by the most recent present one; leading absent
/// frames take the first present frame. Returns the number replaced.
/// Throws EmptySequence if nothing is present.
std::size_t fill_absent_frames(LandmarkSequence& seq);

void write_canonical(const LandmarkSequence& seq, std::ostream& sink);
LandmarkSequence read_canonical(std::istream& source);

LandmarkSequence read_canonical_file(const std::filesystem::path& path);
void write_canonical_file(const LandmarkSequence& seq, const std::filesystem::path& path);

LandmarkSequence read_csv_sequence(std::istream& source, const DetectorProfile& profile);

}  // namespace signface
