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

#include "minidrive/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace minidrive
{

namespace
{

void check_horizon(int h)
{
  if (h < 1 || h > kDecisionSteps) {
    throw DomainError("horizon must cover 1..40 frames, got " + std::to_string(h));
  }
}

double accumulate_term(double distance, Averaging averaging)
{
  return averaging == Averaging::squared ? distance * distance : distance;
}

std::string format_number(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string horizon_label(double seconds) { return format_number(seconds); }

}  // namespace

int horizon_frames(double seconds)
{
  const double frames = seconds / kFrameDt;
  const double rounded = std::round(frames);
  if (!std::isfinite(frames) || std::abs(frames - rounded) > 1e-9 || rounded < 1.0 ||
      rounded > kDecisionSteps) {
    throw DomainError("horizon " + format_number(seconds) + " s is not a frame in 0.1..4 s");
  }
  return static_cast<int>(rounded);
}

DisplacementError ade_fde(
  const Waypoints & pred, const Waypoints & ref, int horizon_frames, Averaging averaging)
{
  check_horizon(horizon_frames);
  if (!pred.allFinite() || !ref.allFinite()) {
    throw InvalidInputError("ADE/FDE inputs must be finite");
  }
  DisplacementError out;
  for (int k = 0; k < horizon_frames; ++k) {
    out.average += accumulate_term((pred.row(k) - ref.row(k)).norm(), averaging);
  }
  out.average /= horizon_frames;
  out.final = (pred.row(horizon_frames - 1) - ref.row(horizon_frames - 1)).norm();
  return out;
}

DisplacementError adr_fdr(
  const Waypoints & pred, const Polyline & ref, int horizon_frames, Averaging averaging)
{
  check_horizon(horizon_frames);
  if (ref.empty()) {
    throw InvalidInputError("ADR/FDR needs a non-empty reference");
  }
  auto closest = [&ref](const Vec2 & p) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2 & r : ref) {
      best = std::min(best, (p - r).norm());
    }
    return best;
  };
  DisplacementError out;
  for (int k = 0; k < horizon_frames; ++k) {
    out.average += accumulate_term(closest(pred.row(k).transpose()), averaging);
  }
  out.average /= horizon_frames;
  out.final = closest(pred.row(horizon_frames - 1).transpose());
  return out;
}

ClosedLoopMetrics closed_loop_metrics(
  const std::vector<SimTrace> & traces, const std::vector<std::vector<Vec2>> & references,
  int horizon_frames, Averaging averaging)
{
  check_horizon(horizon_frames);
  if (traces.empty()) {
    throw DomainError("closed-loop metrics need at least one trace");
  }
  if (references.size() != traces.size()) {
    throw InvalidInputError("one reference per trace is required");
  }
  ClosedLoopMetrics out;
  out.scenes = static_cast<int>(traces.size());
  int collided = 0;
  int offroad = 0;
  for (size_t i = 0; i < traces.size(); ++i) {
    const SimTrace & tr = traces[i];
    const auto & ref = references[i];
    if (static_cast<int>(tr.frames.size()) <= horizon_frames ||
        static_cast<int>(ref.size()) <= horizon_frames) {
      throw InvalidInputError("trace '" + tr.scenario_id + "' does not cover the horizon");
    }
    double sum = 0.0;
    for (int k = 1; k <= horizon_frames; ++k) {
      const auto & f = tr.frames[static_cast<size_t>(k)];
      sum += accumulate_term((f.ego.position() - ref[static_cast<size_t>(k)]).norm(), averaging);
    }
    out.l2 += sum / horizon_frames;
    collided += tr.collided_within(horizon_frames) ? 1 : 0;
    offroad += tr.offroad_within(horizon_frames) ? 1 : 0;
  }
  out.l2 /= out.scenes;
  out.cr = static_cast<double>(collided) / out.scenes;
  out.or_rate = static_cast<double>(offroad) / out.scenes;
  return out;
}

std::vector<Vec2> logged_positions(const Scenario & scenario, int first, int count)
{
  if (first < 0 || count < 0 || first + count > scenario.num_frames()) {
    throw HorizonError("requested log frames beyond scenario '" + scenario.id + "'");
  }
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    out.push_back(scenario.ego_log[static_cast<size_t>(first + k)].position());
  }
  return out;
}

double MetricReport::average(int metric) const
{
  const auto & v = values.at(static_cast<size_t>(metric));
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double s = 0.0;
  for (const double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

std::string MetricReport::to_csv() const
{
  std::ostringstream os;
  os << "metric";
  for (const double h : horizons) {
    os << ',' << horizon_label(h);
  }
  os << ",avg\n";
  for (size_t m = 0; m < kMetricNames.size(); ++m) {
    os << kMetricNames[m];
    for (const double v : values[m]) {
      os << ',' << format_number(v);
    }
    os << ',' << format_number(average(static_cast<int>(m))) << '\n';
  }
  return os.str();
}

nlohmann::json MetricReport::to_json() const
{
  nlohmann::json metrics = nlohmann::json::object();
  for (size_t m = 0; m < kMetricNames.size(); ++m) {
    nlohmann::json row = nlohmann::json::object();
    for (size_t h = 0; h < horizons.size(); ++h) {
      row[horizon_label(horizons[h])] = values[m][h];
    }
    row["avg"] = average(static_cast<int>(m));
    metrics[kMetricNames[m]] = row;
  }
  return {
    {"horizons", horizons},
    {"scenes", scenes},
    {"failed_scenes", failed_scenes},
    {"averaging", averaging == Averaging::squared ? "squared" : "euclidean"},
    {"metrics", metrics}};
}

MetricReport build_report(
  const std::vector<OpenLoopSample> & open_loop, const std::vector<SimTrace> & traces,
  const std::vector<std::vector<Vec2>> & references, const std::vector<double> & horizons,
  Averaging averaging)
{
  if (horizons.empty()) {
    throw InvalidInputError("report needs at least one horizon");
  }
  MetricReport report;
  report.horizons = horizons;
  report.scenes = static_cast<int>(traces.size());
  report.averaging = averaging;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const double seconds : horizons) {
    const int h = horizon_frames(seconds);
    double ade = 0.0;
    double fde = 0.0;
    double adr = 0.0;
    double fdr = 0.0;
    for (const auto & s : open_loop) {
      const auto d = ade_fde(s.decision, s.reference, h, averaging);
      Polyline ref(kDecisionSteps);
      for (int k = 0; k < kDecisionSteps; ++k) {
        ref[static_cast<size_t>(k)] = s.reference.row(k).transpose();
      }
      const auto r = adr_fdr(s.decision, ref, h, averaging);
      ade += d.average;
      fde += d.final;
      adr += r.average;
      fdr += r.final;
    }
    const double n = static_cast<double>(open_loop.size());
    const bool have_open = !open_loop.empty();
    report.values[0].push_back(have_open ? ade / n : nan);
    report.values[1].push_back(have_open ? fde / n : nan);
    report.values[2].push_back(have_open ? fdr / n : nan);
    report.values[3].push_back(have_open ? adr / n : nan);
    if (traces.empty()) {
      report.values[4].push_back(nan);
      report.values[5].push_back(nan);
      report.values[6].push_back(nan);
    } else {
      const auto cl = closed_loop_metrics(traces, references, h, averaging);
      report.values[4].push_back(cl.l2);
      report.values[5].push_back(cl.cr);
      report.values[6].push_back(cl.or_rate);
    }
  }
  return report;
}

}  // namespace minidrive
