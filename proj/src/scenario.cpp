// Copyright 2026 The minidrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "minidrive/scenario.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace minidrive
{

using nlohmann::json;

std::optional<OrientedBox> AgentTrack::box_at(int frame) const
{
  if (frame < 0 || frame >= static_cast<int>(poses.size()) || !poses[static_cast<size_t>(frame)]) {
    return std::nullopt;
  }
  const AgentPose & p = *poses[static_cast<size_t>(frame)];
  return OrientedBox{p.position, p.heading, length, width};
}

LightState TrafficLight::state_at(int frame) const
{
  LightState state = schedule.empty() ? LightState::green : schedule.front().second;
  for (const auto & [from, s] : schedule) {
    if (from <= frame) {
      state = s;
    }
  }
  return state;
}

std::vector<OrientedBox> Scenario::agent_boxes(int frame) const
{
  std::vector<OrientedBox> boxes;
  for (const AgentTrack & a : agents) {
    if (auto box = a.box_at(frame)) {
      boxes.push_back(*box);
    }
  }
  return boxes;
}

bool operator==(const Scenario & a, const Scenario & b)
{
  return a.id == b.id && a.dt == b.dt && a.ego_log == b.ego_log && a.agents == b.agents &&
         a.map == b.map && a.traffic_lights == b.traffic_lights;
}

std::string RasterRef::path() const
{
  return kind + "/" + scenario_id + "_" + std::to_string(frame) + ".bin";
}

std::string to_string(AgentKind kind)
{
  return kind == AgentKind::vehicle ? "vehicle" : "pedestrian";
}

std::string to_string(LightState state)
{
  switch (state) {
    case LightState::red:
      return "red";
    case LightState::yellow:
      return "yellow";
    case LightState::green:
      return "green";
  }
  return "green";
}

namespace
{

class LineContext
{
public:
  LineContext(const std::string & file, int line) : file_(file), line_(line) {}

  [[noreturn]] void fail(const std::string & field, const std::string & what) const
  {
    throw ParseError(file_, line_, field, what);
  }

  const json & member(const json & obj, const std::string & key, const std::string & path) const
  {
    if (!obj.is_object() || !obj.contains(key)) {
      fail(path + key, "missing");
    }
    return obj.at(key);
  }

  double number(const json & obj, const std::string & key, const std::string & path) const
  {
    const json & v = member(obj, key, path);
    if (!v.is_number()) {
      fail(path + key, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(path + key, "must be finite");
    }
    return d;
  }

  std::string string(const json & obj, const std::string & key, const std::string & path) const
  {
    const json & v = member(obj, key, path);
    if (!v.is_string()) {
      fail(path + key, "expected a string");
    }
    return v.get<std::string>();
  }

  Vec2 point(const json & v, const std::string & field) const
  {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(field, "expected [x, y]");
    }
    const Vec2 p(v[0].get<double>(), v[1].get<double>());
    if (!p.allFinite()) {
      fail(field, "must be finite");
    }
    return p;
  }

  std::vector<Vec2> points(const json & v, const std::string & field, size_t min_size) const
  {
    if (!v.is_array()) {
      fail(field, "expected an array of points");
    }
    std::vector<Vec2> out;
    for (size_t i = 0; i < v.size(); ++i) {
      out.push_back(point(v[i], field + "[" + std::to_string(i) + "]"));
    }
    if (out.size() < min_size) {
      fail(field, "needs at least " + std::to_string(min_size) + " points");
    }
    return out;
  }

  template <typename T>
  std::vector<T> shapes(const json & map, const std::string & key, size_t min_size) const
  {
    std::vector<T> out;
    if (!map.contains(key)) {
      return out;
    }
    const json & arr = map.at(key);
    if (!arr.is_array()) {
      fail("map." + key, "expected an array");
    }
    for (size_t i = 0; i < arr.size(); ++i) {
      out.push_back(points(arr[i], "map." + key + "[" + std::to_string(i) + "]", min_size));
    }
    return out;
  }

  VehicleState ego(const json & v) const
  {
    const double px = number(v, "px", "ego.");
    const double py = number(v, "py", "ego.");
    const double theta = number(v, "theta", "ego.");
    const double speed = number(v, "v", "ego.");
    if (speed < 0.0) {
      fail("ego.v", "must be non-negative");
    }
    return VehicleState(px, py, theta, speed);
  }

private:
  const std::string & file_;
  int line_;
};

LightState parse_light(const std::string & s, const LineContext & ctx, const std::string & field)
{
  if (s == "red") {
    return LightState::red;
  }
  if (s == "yellow") {
    return LightState::yellow;
  }
  if (s == "green") {
    return LightState::green;
  }
  ctx.fail(field, "unknown light state '" + s + "'");
}

json point_json(const Vec2 & p) { return json::array({p.x(), p.y()}); }

json points_json(const std::vector<Vec2> & pts)
{
  json arr = json::array();
  for (const Vec2 & p : pts) {
    arr.push_back(point_json(p));
  }
  return arr;
}

}  // namespace

Scenario parse_scenario(std::istream & is, const std::string & name)
{
  Scenario sc;
  std::string text;
  int line_no = 0;
  bool have_header = false;
  std::vector<std::string> agent_ids;

  while (std::getline(is, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const LineContext ctx(name, line_no);
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error & e) {
      ctx.fail("<json>", e.what());
    }
    if (!obj.is_object()) {
      ctx.fail("<json>", "expected an object");
    }

    if (!have_header) {
      const json & version = ctx.member(obj, "schema_version", "");
      if (!version.is_number_integer() || version.get<int>() != kScenarioSchemaVersion) {
        ctx.fail("schema_version", "unsupported schema version");
      }
      sc.id = ctx.string(obj, "id", "");
      sc.dt = ctx.number(obj, "dt", "");
      if (std::abs(sc.dt - kFrameDt) > 1e-12) {
        ctx.fail("dt", "must be 0.1 s");
      }
      if (obj.contains("map")) {
        const json & m = obj.at("map");
        if (!m.is_object()) {
          ctx.fail("map", "expected an object");
        }
        sc.map.lanes = ctx.shapes<Polyline>(m, "lanes", 2);
        sc.map.drivable_areas = ctx.shapes<Polygon>(m, "drivable_areas", 3);
        sc.map.intersections = ctx.shapes<Polygon>(m, "intersections", 3);
      }
      if (obj.contains("agents")) {
        const json & arr = obj.at("agents");
        if (!arr.is_array()) {
          ctx.fail("agents", "expected an array");
        }
        for (size_t i = 0; i < arr.size(); ++i) {
          const std::string path = "agents[" + std::to_string(i) + "].";
          AgentTrack track;
          track.id = ctx.string(arr[i], "id", path);
          const std::string kind = ctx.string(arr[i], "kind", path);
          if (kind == "vehicle") {
            track.kind = AgentKind::vehicle;
          } else if (kind == "pedestrian") {
            track.kind = AgentKind::pedestrian;
          } else {
            ctx.fail(path + "kind", "unknown agent kind '" + kind + "'");
          }
          track.length = ctx.number(arr[i], "length", path);
          track.width = ctx.number(arr[i], "width", path);
          if (track.length <= 0.0 || track.width <= 0.0) {
            ctx.fail(path + "length", "agent extent must be positive");
          }
          if (std::find(agent_ids.begin(), agent_ids.end(), track.id) != agent_ids.end()) {
            ctx.fail(path + "id", "duplicate agent id");
          }
          agent_ids.push_back(track.id);
          sc.agents.push_back(std::move(track));
        }
      }
      if (obj.contains("traffic_lights")) {
        const json & arr = obj.at("traffic_lights");
        if (!arr.is_array()) {
          ctx.fail("traffic_lights", "expected an array");
        }
        for (size_t i = 0; i < arr.size(); ++i) {
          const std::string path = "traffic_lights[" + std::to_string(i) + "].";
          TrafficLight light;
          light.id = ctx.string(arr[i], "id", path);
          light.position = ctx.point(ctx.member(arr[i], "position", path), path + "position");
          const json & sched = ctx.member(arr[i], "schedule", path);
          if (!sched.is_array() || sched.empty()) {
            ctx.fail(path + "schedule", "expected a non-empty array");
          }
          int previous = -1;
          for (size_t k = 0; k < sched.size(); ++k) {
            const std::string spath = path + "schedule[" + std::to_string(k) + "].";
            const json & from_json = ctx.member(sched[k], "from_frame", spath);
            if (!from_json.is_number_integer()) {
              ctx.fail(spath + "from_frame", "expected an integer");
            }
            const int from = from_json.get<int>();
            if (from <= previous || (k == 0 && from != 0)) {
              ctx.fail(spath + "from_frame", "schedule must start at 0 and increase");
            }
            previous = from;
            light.schedule.emplace_back(
              from, parse_light(ctx.string(sched[k], "state", spath), ctx, spath + "state"));
          }
          sc.traffic_lights.push_back(std::move(light));
        }
      }
      have_header = true;
      continue;
    }

    // Frame line.
    const json & frame_json = ctx.member(obj, "frame", "");
    if (!frame_json.is_number_integer() || frame_json.get<int>() != sc.num_frames()) {
      ctx.fail("frame", "frames must be consecutive from 0");
    }
    sc.ego_log.push_back(ctx.ego(ctx.member(obj, "ego", "")));
    const size_t f = sc.ego_log.size() - 1;
    for (auto & track : sc.agents) {
      track.poses.resize(f + 1);
    }
    if (obj.contains("agents")) {
      const json & arr = obj.at("agents");
      if (!arr.is_array()) {
        ctx.fail("agents", "expected an array");
      }
      for (size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "agents[" + std::to_string(i) + "].";
        const std::string id = ctx.string(arr[i], "id", path);
        const auto it = std::find(agent_ids.begin(), agent_ids.end(), id);
        if (it == agent_ids.end()) {
          ctx.fail(path + "id", "agent '" + id + "' not declared in the header");
        }
        auto & slot = sc.agents[static_cast<size_t>(it - agent_ids.begin())].poses[f];
        if (slot) {
          ctx.fail(path + "id", "agent listed twice in one frame");
        }
        slot = AgentPose{
          Vec2(ctx.number(arr[i], "x", path), ctx.number(arr[i], "y", path)),
          ctx.number(arr[i], "heading", path)};
      }
    }
  }

  if (!have_header) {
    throw ParseError(name, line_no, "<header>", "missing header line");
  }
  return sc;
}

Scenario load_scenario_file(const std::filesystem::path & file)
{
  std::ifstream is(file);
  if (!is) {
    throw ParseError(file.string(), 0, "<file>", "cannot open");
  }
  return parse_scenario(is, file.string());
}

std::vector<Scenario> load_scenarios(const std::filesystem::path & dir)
{
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError(dir.string(), 0, "<dir>", "not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto & entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  out.reserve(files.size());
  for (const auto & f : files) {
    out.push_back(load_scenario_file(f));
  }
  return out;
}

void write_scenario(const Scenario & sc, std::ostream & os)
{
  json header;
  header["schema_version"] = kScenarioSchemaVersion;
  header["id"] = sc.id;
  header["dt"] = sc.dt;
  json map;
  map["lanes"] = json::array();
  for (const auto & l : sc.map.lanes) {
    map["lanes"].push_back(points_json(l));
  }
  map["drivable_areas"] = json::array();
  for (const auto & p : sc.map.drivable_areas) {
    map["drivable_areas"].push_back(points_json(p));
  }
  map["intersections"] = json::array();
  for (const auto & p : sc.map.intersections) {
    map["intersections"].push_back(points_json(p));
  }
  header["map"] = map;
  header["agents"] = json::array();
  for (const auto & a : sc.agents) {
    header["agents"].push_back(
      {{"id", a.id}, {"kind", to_string(a.kind)}, {"length", a.length}, {"width", a.width}});
  }
  header["traffic_lights"] = json::array();
  for (const auto & l : sc.traffic_lights) {
    json sched = json::array();
    for (const auto & [from, state] : l.schedule) {
      sched.push_back({{"from_frame", from}, {"state", to_string(state)}});
    }
    header["traffic_lights"].push_back(
      {{"id", l.id}, {"position", point_json(l.position)}, {"schedule", sched}});
  }
  os << header.dump() << '\n';

  for (int f = 0; f < sc.num_frames(); ++f) {
    const VehicleState & e = sc.ego_log[static_cast<size_t>(f)];
    json line;
    line["frame"] = f;
    line["ego"] = {{"px", e.px}, {"py", e.py}, {"theta", e.theta}, {"v", e.v}};
    json agents = json::array();
    for (const auto & a : sc.agents) {
      if (f < static_cast<int>(a.poses.size()) && a.poses[static_cast<size_t>(f)]) {
        const AgentPose & p = *a.poses[static_cast<size_t>(f)];
        agents.push_back(
          {{"id", a.id}, {"x", p.position.x()}, {"y", p.position.y()}, {"heading", p.heading}});
      }
    }
    line["agents"] = agents;
    os << line.dump() << '\n';
  }
}

void save_scenario(const Scenario & scenario, const std::filesystem::path & file)
{
  std::ofstream os(file);
  if (!os) {
    throw InvalidInputError("cannot open " + file.string() + " for writing");
  }
  write_scenario(scenario, os);
}

Waypoints ego_frame_future(const Scenario & scenario, int frame)
{
  if (frame < 0 || frame + kDecisionSteps >= scenario.num_frames()) {
    throw HorizonError(
      "frame " + std::to_string(frame) + " of scenario '" + scenario.id +
      "' lacks a full 40-frame future");
  }
  const VehicleState & now = scenario.ego_log[static_cast<size_t>(frame)];
  const Eigen::Matrix2d to_ego = Eigen::Rotation2Dd(-now.theta).toRotationMatrix();
  Waypoints out;
  for (int k = 1; k <= kDecisionSteps; ++k) {
    const Vec2 d = scenario.ego_log[static_cast<size_t>(frame + k)].position() - now.position();
    out.row(k - 1) = (to_ego * d).transpose();
  }
  return out;
}

std::vector<TrainingRecord> filter_and_extract(const std::vector<Scenario> & scenarios)
{
  std::vector<TrainingRecord> out;
  for (const Scenario & sc : scenarios) {
    if (sc.num_frames() < kMinScenarioFrames) {
      continue;
    }
    for (int f = 0; f + kDecisionSteps < sc.num_frames(); ++f) {
      out.push_back(TrainingRecord{
        sc.id, f, ego_frame_future(sc, f), RasterRef{sc.id, f, "bev"},
        RasterRef{sc.id, f + 1, "bev"}, RasterRef{sc.id, f + 1, "env"}});
    }
  }
  return out;
}

Polyline ego_path(const Scenario & scenario, int first_frame)
{
  Polyline out;
  for (int f = std::max(0, first_frame); f < scenario.num_frames(); ++f) {
    out.push_back(scenario.ego_log[static_cast<size_t>(f)].position());
  }
  return out;
}

}  // namespace minidrive
