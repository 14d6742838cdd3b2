#include "metafal/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "metafal/errors.hpp"

namespace metafal {

Json parse_document(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

Json read_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string() + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw ParseError("field '" + path + "': " + what);
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) {
    bad_field(path, "expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    bad_field(path + "." + key, "missing");
  }
  return *it;
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) {
    bad_field(path, "expected a number, got " + std::string(j.type_name()));
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    bad_field(path, "not finite");
  }
  return v;
}

double number_at(const Json& obj, const char* key, const std::string& path) {
  return as_number(require(obj, key, path), path + "." + key);
}

std::uint64_t as_count(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    bad_field(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) {
    bad_field(path, "expected true or false");
  }
  return j.get<bool>();
}

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) {
    bad_field(path, "expected an array");
  }
  return j;
}

struct RealField {
  const char* key;
  double ScenarioConfig::*member;
  bool angle;
};

constexpr RealField kRealFields[] = {
    {"amplitude", &ScenarioConfig::amplitude, false},
    {"x_start", &ScenarioConfig::x_start, false},
    {"x_end", &ScenarioConfig::x_end, false},
    {"width", &ScenarioConfig::width, false},
    {"end_zone_start", &ScenarioConfig::end_zone_start, false},
    {"boundary_sample_step", &ScenarioConfig::boundary_sample_step, false},
    {"car_length", &ScenarioConfig::car_length, false},
    {"car_width", &ScenarioConfig::car_width, false},
    {"wheelbase", &ScenarioConfig::wheelbase, false},
    {"rear_overhang", &ScenarioConfig::rear_overhang, false},
    {"max_speed", &ScenarioConfig::max_speed, false},
    {"max_steer_rate", &ScenarioConfig::max_steer_rate, true},
    {"max_steer", &ScenarioConfig::max_steer, true},
    {"control_period", &ScenarioConfig::control_period, false},
    {"sensor_range", &ScenarioConfig::sensor_range, false},
    {"sensor_half_angle", &ScenarioConfig::sensor_half_angle, true},
    {"obstacle_radius", &ScenarioConfig::obstacle_radius, false},
};

struct CountField {
  const char* key;
  std::size_t ScenarioConfig::*member;
};

constexpr CountField kCountFields[] = {
    {"obstacle_count", &ScenarioConfig::obstacle_count},
    {"max_obstacles", &ScenarioConfig::max_obstacles},
    {"horizon", &ScenarioConfig::horizon},
};

}  // namespace

Json scenario_to_json(const ScenarioConfig& cfg) {
  Json j = Json::object();
  for (const auto& f : kRealFields) {
    j[f.key] = cfg.*f.member;
  }
  for (const auto& f : kCountFields) {
    j[f.key] = cfg.*f.member;
  }
  j["substeps"] = cfg.substeps;
  j["keep_start_clear"] = cfg.keep_start_clear;
  j["timeout_is_violation"] = cfg.timeout_is_violation;
  return j;
}

ScenarioConfig scenario_from_json(const Json& j, const std::string& path, ScenarioConfig base) {
  if (!j.is_object()) {
    bad_field(path, "expected an object");
  }
  ScenarioConfig cfg = base;
  for (const auto& [key, value] : j.items()) {
    const std::string at = path + "." + key;
    bool known = false;
    for (const auto& f : kRealFields) {
      if (key == f.key) {
        cfg.*f.member = as_number(value, at);
        known = true;
      } else if (f.angle && key == std::string(f.key) + "_deg") {
        cfg.*f.member = deg_to_rad(as_number(value, at));
        known = true;
      }
    }
    for (const auto& f : kCountFields) {
      if (key == f.key) {
        cfg.*f.member = static_cast<std::size_t>(as_count(value, at));
        known = true;
      }
    }
    if (key == "substeps") {
      cfg.substeps = static_cast<int>(as_count(value, at));
      known = true;
    } else if (key == "keep_start_clear") {
      cfg.keep_start_clear = as_bool(value, at);
      known = true;
    } else if (key == "timeout_is_violation") {
      cfg.timeout_is_violation = as_bool(value, at);
      known = true;
    }
    if (!known) {
      bad_field(at, "unknown key");
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ParseError("field '" + path + "': " + e.what());
  }
  return cfg;
}

Json environment_to_json(const Environment& env) {
  const TrackParams& p = env.params();
  Json obstacles = Json::array();
  for (const Disc& d : env.obstacles()) {
    obstacles.push_back({{"x", d.cx}, {"y", d.cy}, {"r", d.r}});
  }
  return Json{{"track",
               {{"amplitude", p.amplitude},
                {"x_start", p.x_start},
                {"x_end", p.x_end},
                {"width", p.width},
                {"end_zone_start", p.end_zone_start}}},
              {"obstacles", std::move(obstacles)}};
}

Environment environment_from_json(const Json& j, const ScenarioConfig& cfg,
                                  const std::string& path) {
  if (!j.is_object()) {
    bad_field(path, "expected an object");
  }
  const std::string tpath = path + ".track";
  TrackParams p = track_params(cfg);
  if (j.contains("track")) {
    const Json& track = j["track"];
    p.amplitude = number_at(track, "amplitude", tpath);
    p.x_start = number_at(track, "x_start", tpath);
    p.x_end = number_at(track, "x_end", tpath);
    p.width = number_at(track, "width", tpath);
    p.end_zone_start = track.contains("end_zone_start")
                           ? number_at(track, "end_zone_start", tpath)
                           : p.x_end - 0.1 * (p.x_end - p.x_start);
  }
  if (!(p.x_start < p.x_end) || !(p.width > 0.0) || !(p.end_zone_start > p.x_start) ||
      !(p.end_zone_start < p.x_end)) {
    bad_field(tpath, "inconsistent track range, width or end zone");
  }

  const std::string opath = path + ".obstacles";
  std::vector<Disc> obstacles;
  const Json& list = as_array(require(j, "obstacles", path), opath);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = opath + "[" + std::to_string(i) + "]";
    Disc d{number_at(list[i], "x", at), number_at(list[i], "y", at), number_at(list[i], "r", at)};
    if (!(d.r > 0.0)) {
      bad_field(at + ".r", "radius must be positive");
    }
    obstacles.push_back(d);
  }
  try {
    return Environment(obstructed_track_type(std::max(cfg.max_obstacles, obstacles.size())), p,
                       make_track_geometry(p, cfg.boundary_sample_step), std::move(obstacles));
  } catch (const Error& e) {
    throw ParseError("field '" + path + "': " + e.what());
  }
}

Json trajectory_to_json(const Trajectory& traj) {
  Json out = Json::array();
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const SystemState& s = traj.states[t];
    Json e{{"t", t}, {"x", s.x}, {"y", s.y}, {"phi", s.heading}, {"alpha", s.steer}, {"v", s.speed}};
    if (t < traj.controls.size()) {
      e["accel"] = traj.controls[t].accel;
      e["steer_rate"] = traj.controls[t].steer_rate;
    }
    out.push_back(std::move(e));
  }
  return out;
}

Trajectory trajectory_from_json(const Json& j, const std::string& path) {
  const Json& list = as_array(j, path);
  if (list.empty()) {
    bad_field(path, "trajectory is empty");
  }
  Trajectory traj;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    const Json& e = list[i];
    if (as_count(require(e, "t", at), at + ".t") != i) {
      bad_field(at + ".t", "expected " + std::to_string(i));
    }
    traj.states.push_back(SystemState{number_at(e, "x", at), number_at(e, "y", at),
                                      number_at(e, "phi", at), number_at(e, "alpha", at),
                                      number_at(e, "v", at)});
    if (i + 1 < list.size()) {
      traj.controls.push_back(Control{number_at(e, "accel", at), number_at(e, "steer_rate", at)});
    }
  }
  return traj;
}

Json status_to_json(const StatusReport& st) {
  return Json{{"status", st.status},
              {"kind", std::string(to_string(st.kind))},
              {"terminal_step", st.terminal_step}};
}

std::string hex_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * bytes.size());
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> hex_decode(std::string_view hex, const std::string& path) {
  if (hex.size() % 2 != 0) {
    bad_field(path, "odd number of hex digits");
  }
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    bad_field(path, std::string("invalid hex digit '") + c + "'");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  }
  return out;
}

Json meta_state_to_json(const MetaState& s, const ScenarioConfig& cfg) {
  Json obs = Json::array();
  for (const Observation& o : s.history) {
    const auto bits = o.pack_bitmap();
    obs.push_back({{"bitmap", hex_encode(bits)}, {"alpha", o.steer}});
  }
  Json st = status_to_json(s.status);
  st["distance_to_failure"] = s.dtf;
  return Json{{"scenario", scenario_to_json(cfg)},
              {"environment", environment_to_json(s.env)},
              {"trajectory", trajectory_to_json(s.traj)},
              {"observations", std::move(obs)},
              {"status", std::move(st)}};
}

namespace {

FailureKind kind_from_string(const std::string& s, const std::string& path) {
  for (FailureKind k : {FailureKind::kNone, FailureKind::kCollisionObstacle,
                        FailureKind::kCollisionShoulder, FailureKind::kTimeoutNoReach}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  bad_field(path, "unknown failure kind '" + s + "'");
}

}  // namespace

LoadedMetaState meta_state_from_json(const Json& j) {
  ScenarioConfig cfg;
  if (j.contains("scenario")) {
    cfg = scenario_from_json(j["scenario"]);
  }
  Environment env = environment_from_json(require(j, "environment", "meta_state"), cfg);
  Trajectory traj = trajectory_from_json(require(j, "trajectory", "meta_state"));
  rebuild_shoulder_cache(traj, env, cfg);

  ObservationHistory history;
  if (j.contains("observations")) {
    const Json& list = as_array(j["observations"], "observations");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string at = "observations[" + std::to_string(i) + "]";
      const Json& bm = require(list[i], "bitmap", at);
      if (!bm.is_string()) {
        bad_field(at + ".bitmap", "expected a hex string");
      }
      const auto bytes = hex_decode(bm.get<std::string>(), at + ".bitmap");
      if (bytes.size() != kBitmapBytes) {
        bad_field(at + ".bitmap", "expected " + std::to_string(kBitmapBytes) + " bytes");
      }
      try {
        history.push_back(Observation::from_bitmap(
            std::span<const std::uint8_t, kBitmapBytes>(bytes.data(), kBitmapBytes),
            number_at(list[i], "alpha", at)));
      } catch (const ControllerProtocolError& e) {
        bad_field(at + ".bitmap", e.what());
      }
    }
  }

  MetaState s{std::move(env), std::move(traj), std::move(history), {}, 1.0};
  if (j.contains("status")) {
    const Json& st = j["status"];
    s.status.status = static_cast<int>(as_count(require(st, "status", "status"), "status.status"));
    const Json& kind = require(st, "kind", "status");
    if (!kind.is_string()) {
      bad_field("status.kind", "expected a string");
    }
    s.status.kind = kind_from_string(kind.get<std::string>(), "status.kind");
    s.status.terminal_step = as_count(require(st, "terminal_step", "status"), "status.terminal_step");
    if (st.contains("distance_to_failure")) {
      s.dtf = number_at(st, "distance_to_failure", "status");
    }
  } else {
    s.status = status(s.traj, s.env, cfg);
    s.dtf = distance_to_failure(s.traj, s.env, cfg);
  }
  return LoadedMetaState{cfg, std::move(s)};
}

}  // namespace metafal
