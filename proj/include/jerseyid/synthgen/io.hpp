#pragma once

// On-disk dataset layout:
//
//   <dir>/manifest.json       class space, rosters, one record per tracklet
//   <dir>/shifts.jsonl        one shift record per line
//   <dir>/frames/<id>.trkl    "TRKL", u32 n, u32 H, u32 W, u32 C, then
//                             n*H*W*C little-endian float32 pixels

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "jerseyid/common.hpp"
#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::synth {

namespace fs = std::filesystem;
using nlohmann::json;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kShiftsName = "shifts.jsonl";
inline constexpr std::string_view kFramesDir = "frames";
inline constexpr std::array<char, 4> kFrameMagic = {'T', 'R', 'K', 'L'};

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  os.write(reinterpret_cast<const char*>(&bits), 4);
}

template <typename T>
T get_le(std::istream& is, const fs::path& path) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits = 0;
  if (!is.read(reinterpret_cast<char*>(&bits), 4)) {
    throw DatasetError(path.string() + ": truncated frame file");
  }
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  T value;
  std::memcpy(&value, &bits, 4);
  return value;
}

inline const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw DatasetError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

inline std::string string_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw DatasetError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline double number_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw DatasetError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::uint64_t count_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw DatasetError(where + ": field '" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::vector<int> int_list_field(const json& obj, const std::string& key,
                                       const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw DatasetError(where + ": field '" + key + "' must be an array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) {
      throw DatasetError(where + ": field '" + key + "' must hold integers");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

inline std::string bits_to_string(const std::vector<bool>& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

inline std::vector<bool> bits_from_string(const std::string& s, const std::string& where) {
  std::vector<bool> bits(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw DatasetError(where + ": bit string must be 0/1");
    bits[i] = s[i] == '1';
  }
  return bits;
}

}  // namespace detail

inline void write_frames_file(const fs::path& path, const std::vector<Frame>& frames) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DatasetError(path.string() + ": cannot open for writing");
  const Frame proto = frames.empty() ? Frame{} : frames.front();
  os.write(kFrameMagic.data(), 4);
  detail::put_le(os, static_cast<std::uint32_t>(frames.size()));
  detail::put_le(os, static_cast<std::uint32_t>(proto.height));
  detail::put_le(os, static_cast<std::uint32_t>(proto.width));
  detail::put_le(os, static_cast<std::uint32_t>(proto.channels));
  for (const auto& f : frames) {
    if (!f.same_geometry(proto)) throw DatasetError(path.string() + ": frames differ in shape");
    if constexpr (std::endian::native == std::endian::little) {
      os.write(reinterpret_cast<const char*>(f.pixels.data()),
               static_cast<std::streamsize>(f.pixels.size() * sizeof(float)));
    } else {
      for (float v : f.pixels) detail::put_le(os, v);
    }
  }
  if (!os) throw DatasetError(path.string() + ": write failed");
}

inline std::vector<Frame> read_frames_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DatasetError(path.string() + ": cannot open frame file");
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kFrameMagic) {
    throw DatasetError(path.string() + ": bad magic, expected TRKL");
  }
  const auto n = detail::get_le<std::uint32_t>(is, path);
  const auto h = detail::get_le<std::uint32_t>(is, path);
  const auto w = detail::get_le<std::uint32_t>(is, path);
  const auto c = detail::get_le<std::uint32_t>(is, path);
  std::vector<Frame> frames;
  frames.reserve(n);
  for (std::uint32_t k = 0; k < n; ++k) {
    Frame f(h, w, c);
    if constexpr (std::endian::native == std::endian::little) {
      if (!is.read(reinterpret_cast<char*>(f.pixels.data()),
                   static_cast<std::streamsize>(f.pixels.size() * sizeof(float)))) {
        throw DatasetError(path.string() + ": truncated frame file");
      }
    } else {
      for (auto& v : f.pixels) v = detail::get_le<float>(is, path);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

inline json shift_record_to_json(const ShiftRecord& r) {
  return json{{"team", std::string(to_string(r.team))},
              {"jersey", r.jersey},
              {"start_s", r.start_s},
              {"end_s", r.end_s}};
}

inline void write_shift_db(const fs::path& path, const ShiftDb& db) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DatasetError(path.string() + ": cannot open for writing");
  for (const auto& r : db.records()) os << shift_record_to_json(r).dump() << '\n';
  if (!os) throw DatasetError(path.string() + ": write failed");
}

inline ShiftDb read_shift_db(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DatasetError(path.string() + ": cannot open shift database");
  std::vector<ShiftRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DatasetError(where + ": " + e.what());
    }
    ShiftRecord r;
    const std::string team = detail::string_field(obj, "team", where);
    if (team != "home" && team != "away") {
      throw DatasetError(where + ": field 'team' must be \"home\" or \"away\"");
    }
    r.team = team_side_from_string(team);
    const json& jersey = detail::field(obj, "jersey", where);
    if (!jersey.is_number_integer()) throw DatasetError(where + ": field 'jersey' must be an int");
    r.jersey = jersey.get<int>();
    r.start_s = detail::number_field(obj, "start_s", where);
    r.end_s = detail::number_field(obj, "end_s", where);
    if (!(r.start_s >= 0.0) || !(r.start_s < r.end_s)) {
      throw DatasetError(where + ": field 'end_s' must exceed 'start_s' >= 0");
    }
    records.push_back(r);
  }
  return ShiftDb(std::move(records));
}

/// Writes the full dataset under `dir` (created if needed) and returns the
/// manifest that was written.
inline json write_dataset(const Dataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / kFramesDir, ec);
  if (ec) throw DatasetError((dir / kFramesDir).string() + ": " + ec.message());

  json records = json::array();
  auto emit = [&](const Tracklet& t, const char* split) {
    if (t.visibility.size() != t.frames.size()) {
      throw DatasetError("tracklet " + t.id + ": visibility length differs from frame count");
    }
    const std::string rel = std::string(kFramesDir) + "/" + t.id + ".trkl";
    write_frames_file(dir / rel, t.frames);
    records.push_back(json{{"id", t.id},
                           {"split", split},
                           {"team_side", std::string(to_string(t.team_side))},
                           {"label", t.label ? json(*t.label) : json(nullptr)},
                           {"n", t.frames.size()},
                           {"visibility", detail::bits_to_string(t.visibility)},
                           {"frames", rel},
                           {"clip_start_s", t.clip_start_s},
                           {"clip_end_s", t.clip_end_s}});
  };
  for (const auto& t : ds.train) emit(t, "train");
  for (const auto& t : ds.test) emit(t, "test");

  write_shift_db(dir / kShiftsName, ds.shifts);

  json manifest{{"format", "jerseyid-dataset"},
                {"version", 1},
                {"class_space", ds.classes.jerseys()},
                {"rosters", {{"home", ds.rosters.home}, {"away", ds.rosters.away}}},
                {"game_length_s", ds.game_length_s},
                {"shift_db", std::string(kShiftsName)},
                {"tracklets", records}};
  std::ofstream os(dir / kManifestName, std::ios::trunc);
  if (!os) throw DatasetError((dir / kManifestName).string() + ": cannot open for writing");
  os << manifest.dump(1) << '\n';
  if (!os) throw DatasetError((dir / kManifestName).string() + ": write failed");
  return manifest;
}

inline Dataset read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  std::ifstream is(manifest_path);
  if (!is) throw DatasetError(manifest_path.string() + ": cannot open manifest");
  json manifest;
  try {
    manifest = json::parse(is);
  } catch (const json::exception& e) {
    throw DatasetError(manifest_path.string() + ": " + e.what());
  }
  const std::string where = "manifest";
  if (detail::string_field(manifest, "format", where) != "jerseyid-dataset") {
    throw DatasetError("manifest: field 'format' is not jerseyid-dataset");
  }

  Dataset ds;
  try {
    ds.classes = ClassSpace(detail::int_list_field(manifest, "class_space", where));
  } catch (const std::invalid_argument& e) {
    throw DatasetError(std::string("manifest: field 'class_space': ") + e.what());
  }
  const json& rosters = detail::field(manifest, "rosters", where);
  ds.rosters.home = detail::int_list_field(rosters, "home", "manifest.rosters");
  ds.rosters.away = detail::int_list_field(rosters, "away", "manifest.rosters");
  ds.game_length_s = detail::number_field(manifest, "game_length_s", where);
  ds.shifts = read_shift_db(dir / detail::string_field(manifest, "shift_db", where));

  const json& records = detail::field(manifest, "tracklets", where);
  if (!records.is_array()) throw DatasetError("manifest: field 'tracklets' must be an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    const std::string at = "manifest.tracklets[" + std::to_string(i) + "]";
    Tracklet t;
    t.id = detail::string_field(rec, "id", at);
    try {
      t.team_side = team_side_from_string(detail::string_field(rec, "team_side", at));
    } catch (const std::invalid_argument&) {
      throw DatasetError(at + ": field 'team_side' must be home, away or referee");
    }
    const json& label = detail::field(rec, "label", at);
    if (label.is_null()) {
      t.label = std::nullopt;
    } else if (label.is_number_integer() && ds.classes.contains(label.get<int>())) {
      t.label = label.get<int>();
    } else {
      throw DatasetError(at + ": field 'label' must be null or a jersey in the class space");
    }
    const auto n = detail::count_field(rec, "n", at);
    t.visibility = detail::bits_from_string(detail::string_field(rec, "visibility", at), at);
    if (t.visibility.size() != n) {
      throw DatasetError(at + ": field 'visibility' length differs from field 'n'");
    }
    t.clip_start_s = detail::number_field(rec, "clip_start_s", at);
    t.clip_end_s = detail::number_field(rec, "clip_end_s", at);
    t.frames = read_frames_file(dir / detail::string_field(rec, "frames", at));
    if (t.frames.size() != n) {
      throw DatasetError(at + ": field 'n' disagrees with the frame file");
    }
    const std::string split = detail::string_field(rec, "split", at);
    if (split == "train") ds.train.push_back(std::move(t));
    else if (split == "test") ds.test.push_back(std::move(t));
    else throw DatasetError(at + ": field 'split' must be train or test");
  }
  return ds;
}

}  // namespace jerseyid::synth
