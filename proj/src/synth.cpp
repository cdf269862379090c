#include "signface/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "signface/errors.hpp"
#include "signface/formats.hpp"
#include "signface/rng.hpp"

namespace signface {

namespace fs = std::filesystem;
using std::numbers::pi;

FaceGroups face_groups(const DetectorProfile& profile) {
  if (profile.name == ProfileName::mediapipe468)
    return {{256, 328}, {20, 80}, {0, 20}, {80, 176}, {176, 256}};
  return {{0, 17}, {17, 27}, {27, 36}, {36, 48}, {48, 68}};
}

void SynthConfig::validate() const {
  if (min_frames < 1 || min_frames > max_frames || max_frames > 300)
    throw ConfigError("synth: need 1 <= min_frames <= max_frames <= 300");
  if (!(noise_sigma >= 0)) throw ConfigError("synth: noise_sigma must be >= 0");
  if (!(expression_amplitude > 0) || !(shake_frequency > 0))
    throw ConfigError("synth: amplitudes must be > 0");
  for (int c : counts)
    if (c < 0) throw ConfigError("synth: counts must be >= 0");
}

namespace {

void put(PointMatrix& m, int i, double x, double y) { m.row(i) << x, y; }

/// n points on an ellipse, starting at angle a0 and spanning `span` radians.
void ellipse(PointMatrix& m, int first, int n, double cx, double cy, double rx, double ry,
             double a0 = 0.0, double span = 2 * pi, bool closed = true) {
  const double denom = closed ? n : std::max(n - 1, 1);
  for (int i = 0; i < n; ++i) {
    const double a = a0 + span * i / denom;
    put(m, first + i, cx + rx * std::cos(a), cy + ry * std::sin(a));
  }
}

/// n points along an eyebrow arch from x0 to x1.
void brow(PointMatrix& m, int first, int n, double x0, double x1) {
  for (int i = 0; i < n; ++i) {
    const double s = n > 1 ? double(i) / (n - 1) : 0.5;
    put(m, first + i, x0 + (x1 - x0) * s, -0.62 - 0.08 * std::sin(pi * s));
  }
}

PointMatrix ibug_layout(int count) {
  PointMatrix m = PointMatrix::Zero(count, 2);
  // Jaw from the right temple under the chin to the left temple (y points down).
  for (int i = 0; i < 17; ++i) {
    const double a = pi * i / 16.0;
    put(m, i, -0.9 * std::cos(a), -0.1 + 0.95 * std::sin(a));
  }
  brow(m, 17, 5, -0.75, -0.15);
  brow(m, 22, 5, 0.15, 0.75);
  for (int i = 0; i < 4; ++i) put(m, 27 + i, 0.0, -0.45 + 0.15 * i);  // bridge; 30 = tip
  for (int i = 0; i < 5; ++i) put(m, 31 + i, -0.2 + 0.1 * i, 0.1 + 0.03 * std::abs(i - 2));
  ellipse(m, 36, 6, -0.4, -0.38, 0.15, 0.06, pi);
  ellipse(m, 42, 6, 0.4, -0.38, 0.15, 0.06, pi);
  ellipse(m, 48, 12, 0.0, 0.45, 0.35, 0.12, pi);
  ellipse(m, 60, 8, 0.0, 0.45, 0.25, 0.05, pi);
  if (count == 70) {
    put(m, 68, -0.4, -0.38);
    put(m, 69, 0.4, -0.38);
  }
  return m;
}

PointMatrix mesh_layout() {
  PointMatrix m = PointMatrix::Zero(468, 2);
  // Nose block 0..19, tip at 1.
  put(m, 0, 0.0, -0.55);
  for (int i = 2; i < 10; ++i) put(m, i, 0.0, -0.5 + 0.06 * (i - 2));
  for (int i = 10; i < 20; ++i) put(m, i, -0.25 + 0.5 * (i - 10) / 9.0, 0.1 + 0.02 * ((i % 2) ? 1 : -1));
  brow(m, 20, 30, -0.8, -0.12);
  brow(m, 50, 30, 0.12, 0.8);
  ellipse(m, 80, 24, -0.4, -0.38, 0.17, 0.07);
  ellipse(m, 104, 24, -0.4, -0.38, 0.10, 0.04);
  ellipse(m, 128, 24, 0.4, -0.38, 0.17, 0.07);
  ellipse(m, 152, 24, 0.4, -0.38, 0.10, 0.04);
  ellipse(m, 176, 40, 0.0, 0.45, 0.36, 0.13);
  ellipse(m, 216, 40, 0.0, 0.45, 0.26, 0.05);
  ellipse(m, 256, 72, 0.0, -0.1, 0.95, 1.0, 0.0, pi, false);  // jaw
  ellipse(m, 328, 40, 0.0, -0.1, 0.8, 0.85, pi * 1.15, pi * 0.7, false);  // forehead
  // Cheeks: 10 x 5 grid on each side.
  for (int side = 0; side < 2; ++side)
    for (int i = 0; i < 50; ++i) {
      const double sx = side == 0 ? -1.0 : 1.0;
      put(m, 368 + side * 50 + i, sx * (0.45 + 0.04 * (i % 10)), -0.15 + 0.09 * (i / 10));
    }
  return m;
}

}  // namespace

LandmarkFrame neutral_face_template(const DetectorProfile& profile) {
  PointMatrix raw = profile.name == ProfileName::mediapipe468 ? mesh_layout()
                                                               : ibug_layout(profile.landmark_count);
  raw = raw.rowwise() - raw.row(profile.nose_tip_index);
  const double mean = raw.rowwise().norm().sum() / double(profile.landmark_count - 1);
  return {raw / mean, false};
}

PointMatrix to_pixels(const PointMatrix& face_units) {
  return (face_units * kSynthPixelScale).rowwise() + kSynthOrigin.transpose();
}

LandmarkSequence generate_sample(SentenceType cls, const SynthConfig& cfg, std::uint64_t index) {
  cfg.validate();
  const auto& profile = cfg.profile;
  const PointMatrix base = neutral_face_template(profile).points;
  const FaceGroups groups = face_groups(profile);
  const double amp = cfg.expression_amplitude;

  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(index_of(cls)), index}));
  const int length = static_cast<int>(rng.between(cfg.min_frames, cfg.max_frames));
  const double ramp_start = (length - 1) * 2.0 / 3.0;
  const double ramp_span = std::max((length - 1) - ramp_start, 1.0);

  LandmarkSequence seq{profile, kSynthFps, {}};
  seq.frames.reserve(length);
  for (int t = 0; t < length; ++t) {
    PointMatrix pts = base;
    switch (cls) {
      case SentenceType::affirmative:
        break;
      case SentenceType::yes_no_question: {
        const double ramp = std::clamp((t - ramp_start) / ramp_span, 0.0, 1.0);
        for (int i = groups.brows.first; i < groups.brows.last; ++i) pts(i, 1) -= amp * ramp;
        for (int i = groups.jaw.first; i < groups.jaw.last; ++i) {
          const double r = pts.row(i).norm();
          if (r > 0) pts.row(i) -= (amp * ramp / r) * pts.row(i);
        }
        break;
      }
      case SentenceType::wh_question: {
        pts.col(0).array() += amp * std::sin(2 * pi * cfg.shake_frequency * t / kSynthFps);
        for (int i = groups.brows.first; i < groups.brows.last; ++i) pts(i, 1) += amp / 2;
        break;
      }
    }
    if (cfg.noise_sigma > 0)
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        pts(i, 0) += cfg.noise_sigma * rng.normal();
        pts(i, 1) += cfg.noise_sigma * rng.normal();
      }
    seq.frames.push_back({to_pixels(pts), false});
  }
  return seq;
}

DatasetManifest generate_dataset(const SynthConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  if (cfg.counts[0] + cfg.counts[1] + cfg.counts[2] == 0)
    throw EmptyDataset("synth: all class counts are zero");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoFailure("cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  for (int k = 0; k < kNumClasses; ++k) {
    const auto cls = SentenceType(k);
    for (int i = 0; i < cfg.counts[k]; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%04d.jsonl", std::string(to_string(cls)).c_str(), i);
      write_canonical_file(generate_sample(cls, cfg, static_cast<std::uint64_t>(i)),
                           out_dir / name);
      manifest.samples.push_back({name, cls, Split::unassigned, std::nullopt});
    }
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace signface
