#include "signface/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "signface/errors.hpp"

namespace signface {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

double finite_number(const json& v, const char* what) {
  if (!v.is_number()) throw MalformedInput(std::string(what) + " is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw MalformedInput(std::string(what) + " is not finite");
  return d;
}

json parse_json(std::string_view text, const std::string& context) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw MalformedInput(context + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace

LandmarkFrame parse_openpose_frame(std::string_view json_text, const DetectorProfile& profile) {
  const json doc = parse_json(json_text, "openpose frame");
  if (!doc.is_object() || !doc.contains("people") || !doc["people"].is_array())
    throw MalformedInput("openpose frame: missing 'people' array");
  const auto& people = doc["people"];
  if (people.empty()) return LandmarkFrame::zeros(profile.landmark_count, true);

  const auto& person = people.front();
  if (!person.is_object() || !person.contains("face_keypoints_2d") ||
      !person["face_keypoints_2d"].is_array())
    throw MalformedInput("openpose frame: missing 'face_keypoints_2d'");
  const auto& flat = person["face_keypoints_2d"];
  const std::size_t expected = 3 * static_cast<std::size_t>(profile.landmark_count);
  if (flat.size() != expected)
    throw MalformedInput("openpose frame: face_keypoints_2d has " + std::to_string(flat.size()) +
                         " numbers, expected " + std::to_string(expected));

  auto frame = LandmarkFrame::zeros(profile.landmark_count);
  for (int i = 0; i < profile.landmark_count; ++i) {
    frame.points(i, 0) = finite_number(flat[3 * i], "keypoint x");
    frame.points(i, 1) = finite_number(flat[3 * i + 1], "keypoint y");
    finite_number(flat[3 * i + 2], "keypoint confidence");
  }
  // OpenPose reports an undetected face on a detected body as all zeros.
  if (frame.points.isZero(0.0)) frame.absent = true;
  return frame;
}

std::size_t fill_absent_frames(LandmarkSequence& seq) {
  auto first = std::find_if(seq.frames.begin(), seq.frames.end(),
                            [](const LandmarkFrame& f) { return !f.absent; });
  if (first == seq.frames.end()) throw EmptySequence("no face detected in any frame");
  std::size_t filled = 0;
  const LandmarkFrame* last = &*first;
  for (auto& f : seq.frames) {
    if (f.absent) {
      f = *last;
      ++filled;
    } else {
      last = &f;
    }
  }
  return filled;
}

LandmarkSequence load_sequence_openpose(const fs::path& dir, const DetectorProfile& profile,
                                        std::optional<double> fps, LoadStats* stats) {
  if (!fs::is_directory(dir)) throw IoFailure("not a directory: " + dir.string());
  static const std::regex kIndexed(R"(_(\d+)_keypoints\.json$)");
  static const std::regex kAnyDigits(R"((\d+)\D*\.json$)");

  std::map<long long, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_search(name, m, kIndexed) && !std::regex_search(name, m, kAnyDigits))
      throw MalformedInput(entry.path().string() + ": no frame index in filename");
    const long long index = std::stoll(m[1].str());
    if (!files.emplace(index, entry.path()).second)
      throw MalformedInput(entry.path().string() + ": duplicate frame index " +
                           std::to_string(index));
  }
  if (files.empty()) throw EmptySequence("no frames found in " + dir.string());

  LandmarkSequence seq{profile, fps, {}};
  seq.frames.reserve(files.size());
  for (const auto& [index, path] : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      seq.frames.push_back(parse_openpose_frame(buf.str(), profile));
    } catch (const MalformedInput& e) {
      throw MalformedInput(path.string() + ": " + e.what());
    }
  }
  const std::size_t filled = fill_absent_frames(seq);
  if (stats) *stats = {files.size(), filled};
  return seq;
}

void write_canonical(const LandmarkSequence& seq, std::ostream& sink) {
  seq.validate();
  ordered_json header;
  header["type"] = "header";
  header["profile"] = std::string(seq.profile.id());
  header["fps"] = seq.fps ? json(*seq.fps) : json(nullptr);
  header["landmarks"] = seq.profile.landmark_count;
  sink << header.dump() << '\n';

  for (int t = 0; t < seq.length(); ++t) {
    const auto& f = seq.frames[t];
    ordered_json line;
    line["type"] = "frame";
    line["index"] = t;
    if (f.absent) line["absent"] = true;
    auto points = json::array();
    for (Eigen::Index i = 0; i < f.points.rows(); ++i)
      points.push_back(json::array({f.points(i, 0), f.points(i, 1)}));
    line["points"] = std::move(points);
    sink << line.dump() << '\n';
  }
  if (!sink) throw IoFailure("write failed");
}

LandmarkSequence read_canonical(std::istream& source) {
  std::string line;
  std::size_t line_no = 0;
  auto context = [&] { return "line " + std::to_string(line_no); };

  auto next_line = [&]() -> bool {
    while (std::getline(source, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw MalformedInput("canonical file is empty");
  const json header = parse_json(line, context());
  if (!header.is_object() || header.value("type", "") != "header")
    throw MalformedInput(context() + ": first line is not a header");
  LandmarkSequence seq;
  try {
    seq.profile = profile_by_id(header.at("profile").get<std::string>());
    const int declared = header.at("landmarks").get<int>();
    if (declared != seq.profile.landmark_count)
      throw MalformedInput(context() + ": header declares " + std::to_string(declared) +
                           " landmarks but profile " + std::string(seq.profile.id()) +
                           " has " + std::to_string(seq.profile.landmark_count));
    if (header.contains("fps") && !header["fps"].is_null())
      seq.fps = finite_number(header["fps"], "fps");
  } catch (const json::exception& e) {
    throw MalformedInput(context() + ": bad header (" + e.what() + ")");
  } catch (const ConfigError& e) {
    throw MalformedInput(context() + ": " + e.what());
  }

  const int n = seq.profile.landmark_count;
  while (next_line()) {
    const json doc = parse_json(line, context());
    try {
      if (!doc.is_object() || doc.value("type", "") != "frame")
        throw MalformedInput(context() + ": expected a frame record");
      const auto index = doc.at("index").get<long long>();
      if (index != static_cast<long long>(seq.frames.size()))
        throw MalformedInput(context() + ": frame index " + std::to_string(index) +
                             " out of order (expected " + std::to_string(seq.frames.size()) +
                             ")");
      const bool absent = doc.value("absent", false);
      const auto& points = doc.at("points");
      if (!points.is_array()) throw MalformedInput(context() + ": 'points' is not an array");
      auto frame = LandmarkFrame::zeros(n, absent);
      if (!(absent && points.empty())) {
        if (points.size() != static_cast<std::size_t>(n))
          throw MalformedInput(context() + ": frame has " + std::to_string(points.size()) +
                               " points, expected " + std::to_string(n));
        for (int i = 0; i < n; ++i) {
          const auto& p = points[i];
          if (!p.is_array() || p.size() != 2)
            throw MalformedInput(context() + ": point " + std::to_string(i) +
                                 " is not an [x,y] pair");
          frame.points(i, 0) = finite_number(p[0], "x");
          frame.points(i, 1) = finite_number(p[1], "y");
        }
        if (absent && !frame.points.isZero(0.0))
          throw MalformedInput(context() + ": absent frame has nonzero points");
      }
      seq.frames.push_back(std::move(frame));
    } catch (const json::exception& e) {
      throw MalformedInput(context() + ": " + e.what());
    }
  }
  seq.validate();
  return seq;
}

LandmarkSequence read_canonical_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  try {
    return read_canonical(in);
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  } catch (const EmptySequence& e) {
    throw EmptySequence(path.string() + ": " + e.what());
  }
}

void write_canonical_file(const LandmarkSequence& seq, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  write_canonical(seq, out);
}

namespace {

std::vector<std::string_view> split_cells(std::string_view row) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = row.find(',', start);
    cells.push_back(row.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.remove_prefix(1);
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t')) c.remove_suffix(1);
  }
  return cells;
}

std::optional<double> parse_cell(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

}  // namespace

LandmarkSequence read_csv_sequence(std::istream& source, const DetectorProfile& profile) {
  LandmarkSequence seq{profile, std::nullopt, {}};
  const std::size_t columns = static_cast<std::size_t>(profile.feature_dim());
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split_cells(line);
    const std::string ctx = "csv line " + std::to_string(line_no);
    if (cells.size() != columns)
      throw MalformedInput(ctx + ": " + std::to_string(cells.size()) + " columns, expected " +
                           std::to_string(columns));
    auto frame = LandmarkFrame::zeros(profile.landmark_count);
    bool numeric = true;
    for (std::size_t c = 0; c < columns && numeric; ++c) {
      const auto v = parse_cell(cells[c]);
      if (!v) {
        numeric = false;
        break;
      }
      frame.points(static_cast<Eigen::Index>(c / 2), static_cast<Eigen::Index>(c % 2)) = *v;
    }
    const bool was_first = first_row;
    first_row = false;
    if (!numeric) {
      if (was_first) continue;  // header
      throw MalformedInput(ctx + ": non-numeric cell");
    }
    seq.frames.push_back(std::move(frame));
  }
  if (seq.frames.empty()) throw EmptySequence("csv contains no frames");
  seq.validate();
  return seq;
}

}  // namespace signface
