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

#include "minidrive/cli.hpp"

#include "minidrive/fixtures.hpp"
#include "minidrive/image_io.hpp"
#include "minidrive/json_io.hpp"
#include "minidrive/metrics.hpp"
#include "minidrive/min_jerk_planner.hpp"
#include "minidrive/policy.hpp"
#include "minidrive/scenario.hpp"
#include "minidrive/sim_loop.hpp"
#include "minidrive/train_losses.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

namespace minidrive::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

/// Raised for bad flag combinations detected after parsing.
class UsageError : public Error
{
public:
  explicit UsageError(const std::string & what) : Error("E_USAGE", what) {}
};

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw InvalidInputError("cannot open " + path.string() + " for writing");
  }
  os << text;
  if (!os) {
    throw InvalidInputError("failed writing " + path.string());
  }
}

void ensure_dir(const fs::path & dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw InvalidInputError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

std::string error_line(const std::string & code, const std::string & message)
{
  std::string flat = message;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  return "error[" + code + "]: " + flat;
}

std::vector<std::string> scenario_files(const fs::path & dir)
{
  if (!fs::is_directory(dir)) {
    throw InvalidInputError("scenario directory " + dir.string() + " does not exist");
  }
  std::vector<std::string> names;
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string format_number(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int resolve_jobs(int jobs)
{
  if (jobs > 0) {
    return jobs;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)> & fn)
{
  const size_t workers = std::min(n, static_cast<size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) {
        fn(i);
      }
    });
  }
  for (auto & t : pool) {
    t.join();
  }
}

json waypoints_to_json(const Waypoints & w)
{
  json rows = json::array();
  for (int k = 0; k < w.rows(); ++k) {
    rows.push_back({w(k, 0), w(k, 1)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Policy selection shared by simulate and eval-decisions.

struct PolicyArgs
{
  std::string policy{"replay"};
  std::string cmd;
  std::string rasters{"reference"};
  double noise{0.0};
  std::uint64_t seed{0};
  int timeout_ms{5000};
};

void add_policy_options(CLI::App & sub, PolicyArgs & a)
{
  sub.add_option("--policy", a.policy, "Decision policy")
    ->check(CLI::IsMember({"replay", "cv", "external"}))
    ->capture_default_str();
  sub.add_option("--cmd", a.cmd, "Command launching an external policy process");
  sub.add_option("--rasters", a.rasters, "Raster transport for external policies")
    ->check(CLI::IsMember({"reference", "inline"}))
    ->capture_default_str();
  sub.add_option("--noise", a.noise, "Std-dev (m) of Gaussian noise added to decisions")
    ->check(CLI::NonNegativeNumber);
  sub.add_option("--seed", a.seed, "Seed of stochastic policy wrappers")->capture_default_str();
  sub.add_option("--timeout-ms", a.timeout_ms, "External policy response timeout")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
}

void check_policy_args(const PolicyArgs & a)
{
  if (a.policy == "external" && a.cmd.empty()) {
    throw UsageError("--policy external requires --cmd");
  }
}

std::unique_ptr<Policy> make_policy(const PolicyArgs & a, const Scenario & sc, size_t scene_index)
{
  std::unique_ptr<Policy> p;
  if (a.policy == "replay") {
    p = std::make_unique<ReplayPolicy>(sc);
  } else if (a.policy == "cv") {
    p = std::make_unique<ConstantVelocityPolicy>();
  } else {
    ExternalPolicyOptions opts;
    opts.timeout = std::chrono::milliseconds(a.timeout_ms);
    opts.rasters = a.rasters == "inline" ? RasterTransport::inline_last : RasterTransport::reference;
    p = std::make_unique<ExternalPolicy>(a.cmd, opts);
  }
  if (a.noise > 0.0) {
    p = std::make_unique<NoisyPolicy>(std::move(p), a.noise, a.seed + scene_index);
  }
  return p;
}

json policy_to_json(const PolicyArgs & a)
{
  return {{"policy", a.policy}, {"cmd", a.cmd},   {"rasters", a.rasters},
          {"noise", a.noise},   {"seed", a.seed}, {"timeout_ms", a.timeout_ms}};
}

std::vector<double> horizons_up_to(double horizon)
{
  std::vector<double> out;
  for (const double h : kHorizons) {
    if (h <= horizon + 1e-12) {
      out.push_back(h);
    }
  }
  return out;
}

json manifest(
  const std::string & command, const json & config, const std::vector<std::string> & inputs,
  std::uint64_t seed, const json & outputs)
{
  return {
    {"tool", "minidrive"},
    {"version", MINIDRIVE_VERSION},
    {"command", command},
    {"config", config},
    {"scenarios", inputs},
    {"seed", seed},
    {"outputs", outputs}};
}

const CLI::Validator kHorizonValidator(
  [](std::string & text) -> std::string {
    double v = 0.0;
    if (!CLI::detail::lexical_cast(text, v) ||
        std::none_of(kHorizons.begin(), kHorizons.end(), [v](double h) { return v == h; })) {
      return "horizon must be one of 0.5, 1, 2, 3, 4";
    }
    return {};
  },
  "{0.5,1,2,3,4}");

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs
{
  std::string scenarios;
  std::string out;
  PolicyArgs policy;
  double horizon{4.0};
  int jobs{0};
  bool png{false};
  bool squared{false};
  double replan_period{0.1};
  bool zero_end_velocity{false};
  bool rescale{false};
  int start_frame{0};
  std::string config;
};

struct SceneResult
{
  std::string id;
  std::optional<SimTrace> trace;
  std::optional<OpenLoopSample> open_loop;
  std::vector<Vec2> reference;
  std::optional<std::string> error;
};

int cmd_simulate(const SimulateArgs & a, std::ostream & out, std::ostream & err)
{
  check_policy_args(a.policy);
  const int horizon = horizon_frames(a.horizon);
  const fs::path out_dir(a.out);
  ensure_dir(out_dir);
  const std::vector<std::string> files = scenario_files(a.scenarios);

  SimConfig cfg;
  cfg.duration = horizon * kFrameDt;
  cfg.replan_period = a.replan_period;
  cfg.zero_end_velocity = a.zero_end_velocity;
  cfg.bounds_mode = a.rescale ? BoundsMode::rescale : BoundsMode::report;
  cfg.start_frame = a.start_frame;
  cfg.record_rasters = a.png;
  cfg.validate();

  const json config = {
    {"scenarios", a.scenarios},
    {"horizon", a.horizon},
    {"policy", policy_to_json(a.policy)},
    {"replan_period", a.replan_period},
    {"zero_end_velocity", a.zero_end_velocity},
    {"bounds_mode", a.rescale ? "rescale" : "report"},
    {"start_frame", a.start_frame},
    {"squared", a.squared},
    {"png", a.png},
    {"bounds", params_to_json(cfg.bounds)},
    {"offroad_threshold", cfg.offroad_threshold}};
  json outputs = {{"report_csv", "report.csv"}, {"report_json", "report.json"}, {"traces", "traces/"}};
  if (a.png) {
    outputs["frames"] = "frames/";
  }
  write_text(out_dir / "manifest.json", manifest("simulate", config, files, a.policy.seed, outputs).dump(2) + "\n");

  std::vector<Scenario> scenes;
  for (const auto & f : files) {
    scenes.push_back(load_scenario_file(fs::path(a.scenarios) / f));
  }

  std::vector<SceneResult> results(scenes.size());
  parallel_for(scenes.size(), resolve_jobs(a.jobs), [&](size_t i) {
    const Scenario & sc = scenes[i];
    SceneResult & r = results[i];
    r.id = sc.id;
    try {
      auto policy = make_policy(a.policy, sc, i);
      SimTrace trace = run_closed_loop(sc, *policy, cfg);
      if (trace.error) {
        r.error = *trace.error;
      } else {
        r.reference = logged_positions(sc, cfg.start_frame, static_cast<int>(trace.frames.size()));
        if (!trace.decisions.empty() && cfg.start_frame + kDecisionSteps < sc.num_frames()) {
          r.open_loop =
            OpenLoopSample{trace.decisions.front().waypoints, ego_frame_future(sc, cfg.start_frame)};
        }
      }
      r.trace = std::move(trace);
    } catch (const Error & e) {
      r.error = e.code() + ": " + e.what();
    } catch (const std::exception & e) {
      r.error = std::string("E_INTERNAL: ") + e.what();
    }
  });

  // Single collector: every write below happens in scene order.
  ensure_dir(out_dir / "traces");
  std::vector<SimTrace> done;
  std::vector<std::vector<Vec2>> references;
  std::vector<OpenLoopSample> open_loop;
  json scene_status = json::array();
  int failed = 0;
  for (auto & r : results) {
    if (r.trace) {
      std::ostringstream os;
      write_trace_jsonl(*r.trace, os);
      write_text(out_dir / "traces" / (r.id + ".jsonl"), os.str());
      if (a.png) {
        const fs::path dir = out_dir / "frames" / r.id;
        ensure_dir(dir);
        for (size_t k = 0; k < r.trace->rasters.size(); ++k) {
          char name[32];
          std::snprintf(name, sizeof(name), "%04d.png", r.trace->frames[k].frame);
          write_png(r.trace->rasters[k], dir / name);
        }
      }
    }
    if (r.error) {
      ++failed;
      err << "warning: scene '" << r.id << "' failed: " << *r.error << "\n";
      scene_status.push_back({{"id", r.id}, {"status", "error"}, {"error", *r.error}});
      continue;
    }
    scene_status.push_back({{"id", r.id}, {"status", "ok"}});
    done.push_back(std::move(*r.trace));
    references.push_back(std::move(r.reference));
    if (r.open_loop) {
      open_loop.push_back(*r.open_loop);
    }
  }

  MetricReport report = build_report(
    open_loop, done, references, horizons_up_to(a.horizon),
    a.squared ? Averaging::squared : Averaging::euclidean);
  report.failed_scenes = failed;
  json report_json = report.to_json();
  report_json["scene_status"] = scene_status;
  write_text(out_dir / "report.csv", report.to_csv());
  write_text(out_dir / "report.json", report_json.dump(2) + "\n");

  out << "simulated " << scenes.size() << " scenes (" << failed << " failed); report in "
      << (out_dir / "report.json").string() << "\n";
  return failed > 0 ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// eval-decisions: open-loop metrics from logged observations.

struct EvalArgs
{
  std::string scenarios;
  std::string out;
  PolicyArgs policy;
  double horizon{4.0};
  int stride{10};
  int jobs{0};
  bool squared{false};
  std::string config;
};

int cmd_eval_decisions(const EvalArgs & a, std::ostream & out, std::ostream & err)
{
  check_policy_args(a.policy);
  horizon_frames(a.horizon);
  const fs::path out_dir(a.out);
  ensure_dir(out_dir);
  const std::vector<std::string> files = scenario_files(a.scenarios);
  const json config = {
    {"scenarios", a.scenarios}, {"horizon", a.horizon}, {"stride", a.stride},
    {"policy", policy_to_json(a.policy)}, {"squared", a.squared}};
  write_text(
    out_dir / "manifest.json",
    manifest("eval-decisions", config, files, a.policy.seed,
             {{"report_csv", "report.csv"}, {"report_json", "report.json"}})
        .dump(2) + "\n");

  std::vector<Scenario> scenes;
  for (const auto & f : files) {
    scenes.push_back(load_scenario_file(fs::path(a.scenarios) / f));
  }
  std::vector<std::vector<OpenLoopSample>> samples(scenes.size());
  std::vector<std::optional<std::string>> errors(scenes.size());
  parallel_for(scenes.size(), resolve_jobs(a.jobs), [&](size_t i) {
    const Scenario & sc = scenes[i];
    try {
      auto policy = make_policy(a.policy, sc, i);
      const bool render = policy->needs_rasters();
      for (int f = 0; f + kDecisionSteps < sc.num_frames(); f += a.stride) {
        Observation obs;
        obs.frame = f;
        obs.ego = sc.ego_log[static_cast<size_t>(f)];
        for (int h = std::max(0, f - kContextLength + 1); h <= f; ++h) {
          const VehicleState & s = sc.ego_log[static_cast<size_t>(h)];
          ObservationFrame of{h, s, nullptr};
          if (render && h == f) {
            of.raster = std::make_shared<const BevRaster>(
              render_frame(sc, h, s, s, RasterSpec{}, VehicleParams{}));
          }
          obs.history.push_back(std::move(of));
        }
        samples[i].push_back({policy->decide(obs).waypoints, ego_frame_future(sc, f)});
      }
    } catch (const Error & e) {
      errors[i] = e.code() + ": " + e.what();
    } catch (const std::exception & e) {
      errors[i] = std::string("E_INTERNAL: ") + e.what();
    }
  });

  std::vector<OpenLoopSample> all;
  json scene_status = json::array();
  int failed = 0;
  for (size_t i = 0; i < scenes.size(); ++i) {
    if (errors[i]) {
      ++failed;
      err << "warning: scene '" << scenes[i].id << "' failed: " << *errors[i] << "\n";
      scene_status.push_back({{"id", scenes[i].id}, {"status", "error"}, {"error", *errors[i]}});
      continue;
    }
    scene_status.push_back(
      {{"id", scenes[i].id}, {"status", "ok"}, {"samples", samples[i].size()}});
    all.insert(all.end(), samples[i].begin(), samples[i].end());
  }
  MetricReport report = build_report(
    all, {}, {}, horizons_up_to(a.horizon), a.squared ? Averaging::squared : Averaging::euclidean);
  report.scenes = static_cast<int>(scenes.size()) - failed;
  report.failed_scenes = failed;
  json report_json = report.to_json();
  report_json["samples"] = all.size();
  report_json["scene_status"] = scene_status;
  write_text(out_dir / "report.csv", report.to_csv());
  write_text(out_dir / "report.json", report_json.dump(2) + "\n");
  out << "evaluated " << all.size() << " decisions over " << report.scenes << " scenes\n";
  return failed > 0 ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// plan

struct PlanArgs
{
  std::string problem;
  std::string out;
  bool rescale{false};
  std::string config;
};

int cmd_plan(const PlanArgs & a, std::ostream & out)
{
  std::ifstream is(a.problem);
  if (!is) {
    throw InvalidInputError("cannot open " + a.problem);
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error & e) {
    throw ParseError(a.problem, 1, "<json>", e.what());
  }
  const PlanningProblem problem = problem_from_json(j);
  PlannedTrajectory planned = solve(problem);
  if (a.rescale) {
    planned = check_and_enforce_bounds(std::move(planned), problem.bounds, BoundsMode::rescale);
  }
  json result = planned_to_json(planned);
  result["max_constraint_residual"] = max_constraint_residual(problem, planned.traj);
  const std::string text = result.dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    out << "jerk_cost " << format_number(planned.jerk_cost) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs
{
  std::string scenarios;
  std::string out;
  bool tensors{false};
  bool png{false};
  std::string config;
};

int cmd_extract(const ExtractArgs & a, std::ostream & out, std::ostream & err)
{
  const fs::path out_dir(a.out);
  ensure_dir(out_dir);
  const std::vector<std::string> files = scenario_files(a.scenarios);
  const json config = {{"scenarios", a.scenarios}, {"tensors", a.tensors}, {"png", a.png}};
  json outputs = {{"records", "records.jsonl"}};
  if (a.tensors) {
    outputs["tensors"] = "bev/, env/";
  }
  write_text(out_dir / "manifest.json", manifest("extract", config, files, 0, outputs).dump(2) + "\n");

  std::vector<Scenario> scenes;
  for (const auto & f : files) {
    Scenario sc = load_scenario_file(fs::path(a.scenarios) / f);
    if (sc.num_frames() < kMinScenarioFrames) {
      err << "warning: scenario '" << sc.id << "' has " << sc.num_frames() << " frames (< "
          << kMinScenarioFrames << "); skipped\n";
    }
    scenes.push_back(std::move(sc));
  }
  const std::vector<TrainingRecord> records = filter_and_extract(scenes);

  std::ostringstream lines;
  for (const auto & r : records) {
    lines << json{{"scenario", r.scenario_id},
                  {"frame", r.frame},
                  {"target_positions", waypoints_to_json(r.target_positions)},
                  {"current_bev", r.current_bev.path()},
                  {"next_bev", r.next_bev.path()},
                  {"next_env", r.next_env.path()}}
               .dump()
          << "\n";
  }
  write_text(out_dir / "records.jsonl", lines.str());

  if (a.tensors || a.png) {
    std::map<std::string, const Scenario *> by_id;
    for (const auto & sc : scenes) {
      by_id[sc.id] = &sc;
    }
    std::set<std::string> written;
    auto emit = [&](const RasterRef & ref) {
      if (!written.insert(ref.path()).second) {
        return;
      }
      const Scenario & sc = *by_id.at(ref.scenario_id);
      const VehicleState & ego = sc.ego_log[static_cast<size_t>(ref.frame)];
      const BevRaster raster = ref.kind == "env"
                                 ? render_env(sc.map, ego, RasterSpec{})
                                 : render_frame(sc, ref.frame, ego, ego, RasterSpec{}, VehicleParams{});
      const fs::path path = out_dir / ref.path();
      ensure_dir(path.parent_path());
      if (a.tensors) {
        write_tensor(raster, path);
      }
      if (a.png) {
        fs::path png = path;
        write_png(raster, png.replace_extension(".png"));
      }
    };
    for (const auto & r : records) {
      emit(r.current_bev);
      emit(r.next_bev);
      emit(r.next_env);
    }
  }
  out << "extracted " << records.size() << " records\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// score-prediction

struct ScoreArgs
{
  std::string pred;
  std::string truth;
  std::string env;
  std::string out;
  std::string config;
};

int cmd_score_prediction(const ScoreArgs & a, std::ostream & out)
{
  if (!fs::is_directory(a.pred) || !fs::is_directory(a.truth)) {
    throw InvalidInputError("--pred and --truth must be directories");
  }
  std::vector<std::string> names;
  for (const auto & entry : fs::directory_iterator(a.pred)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) {
    throw InvalidInputError("no .bin prediction tensors in " + a.pred);
  }
  json files = json::array();
  double sum_pred = 0.0;
  double sum_fine = 0.0;
  for (const auto & name : names) {
    const BevRaster pr = read_tensor(fs::path(a.pred) / name);
    const BevRaster gt = read_tensor(fs::path(a.truth) / name);
    const BevRaster env = a.env.empty() ? BevRaster(RasterSpec{}) : read_tensor(fs::path(a.env) / name);
    const double lp = prediction_loss(env, pr, gt);
    const double lf = finetune_loss(env, pr, gt);
    sum_pred += lp;
    sum_fine += lf;
    files.push_back({{"file", name}, {"prediction_loss", lp}, {"finetune_loss", lf}});
  }
  const double n = static_cast<double>(names.size());
  const json result = {
    {"count", names.size()},
    {"mean_prediction_loss", sum_pred / n},
    {"mean_finetune_loss", sum_fine / n},
    {"files", files}};
  if (a.out.empty()) {
    out << result.dump(2) << "\n";
  } else {
    write_text(a.out, result.dump(2) + "\n");
    out << "scored " << names.size() << " predictions; mean prediction loss "
        << format_number(sum_pred / n) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// make-fixtures

struct FixtureArgs
{
  std::string set{"all"};
  std::string out{"fixtures"};
  std::uint32_t seed{0};
  std::string config;
};

int cmd_make_fixtures(const FixtureArgs & a, std::ostream & out)
{
  std::vector<Scenario> scenes;
  if (a.set == "paper-scenes") {
    scenes = fixtures::paper_scenes(a.seed);
  } else {
    scenes = fixtures::basic_set(a.seed);
    if (a.set == "all") {
      scenes.push_back(fixtures::collision_course());
    }
  }
  ensure_dir(a.out);
  for (const auto & sc : scenes) {
    save_scenario(sc, fs::path(a.out) / (sc.id + ".jsonl"));
  }
  out << "wrote " << scenes.size() << " scenarios to " << a.out << "\n";
  return kExitOk;
}

/// Splices config-file tokens right after the subcommand name so that
/// explicit flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string> & args)
{
  std::vector<std::string> out = args;
  for (size_t i = 0; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      continue;
    }
    const auto tokens = read_config_tokens(file);
    const auto at = out.empty() ? out.begin() : out.begin() + 1;
    out.insert(at, tokens.begin(), tokens.end());
    break;
  }
  return out;
}

}  // namespace

std::vector<std::string> read_config_tokens(const std::filesystem::path & file)
{
  std::ifstream is(file);
  if (!is) {
    throw InvalidInputError("cannot open config file " + file.string());
  }
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::string> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(file.string(), line_no, "<line>", "expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty() || key == "config") {
      throw ParseError(file.string(), line_no, key, "invalid config key");
    }
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

int run(const std::vector<std::string> & raw_args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"minidrive: minimum-jerk planning and closed-loop evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MINIDRIVE_VERSION);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SimulateArgs sim;
  auto * simulate = app.add_subcommand("simulate", "Closed-loop evaluation over a scenario directory");
  simulate->add_option("--scenarios", sim.scenarios, "Scenario directory (*.jsonl)")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  add_policy_options(*simulate, sim.policy);
  simulate->add_option("--horizon", sim.horizon, "Simulated horizon in seconds")
    ->check(kHorizonValidator)
    ->capture_default_str();
  simulate->add_option("--jobs", sim.jobs, "Parallel scenes (0 = logical cores)");
  simulate->add_flag("--png", sim.png, "Write composed BEV frames as PNG");
  simulate->add_flag("--squared", sim.squared, "Average squared displacements");
  simulate->add_option("--replan-period", sim.replan_period, "Seconds between replans")
    ->capture_default_str();
  simulate->add_flag("--zero-end-velocity", sim.zero_end_velocity, "Plan to a standstill");
  simulate->add_flag("--rescale", sim.rescale, "Time-stretch plans exceeding bounds");
  simulate->add_option("--start-frame", sim.start_frame, "First scenario frame")
    ->check(CLI::NonNegativeNumber);
  simulate->add_option("--config", sim.config, "key=value config file; flags win");

  EvalArgs eval;
  auto * eval_cmd =
    app.add_subcommand("eval-decisions", "Open-loop decision metrics on logged observations");
  eval_cmd->add_option("--scenarios", eval.scenarios, "Scenario directory")->required();
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  add_policy_options(*eval_cmd, eval.policy);
  eval_cmd->add_option("--horizon", eval.horizon, "Largest horizon in seconds")
    ->check(kHorizonValidator)
    ->capture_default_str();
  eval_cmd->add_option("--stride", eval.stride, "Frames between decision instants")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  eval_cmd->add_option("--jobs", eval.jobs, "Parallel scenes (0 = logical cores)");
  eval_cmd->add_flag("--squared", eval.squared, "Average squared displacements");
  eval_cmd->add_option("--config", eval.config, "key=value config file; flags win");

  PlanArgs plan;
  auto * plan_cmd = app.add_subcommand("plan", "Solve one minimum-jerk problem from JSON");
  plan_cmd->add_option("--problem", plan.problem, "Problem JSON file")->required();
  plan_cmd->add_option("--out", plan.out, "Output JSON file (default stdout)");
  plan_cmd->add_flag("--rescale", plan.rescale, "Time-stretch when bounds are exceeded");
  plan_cmd->add_option("--config", plan.config, "key=value config file; flags win");

  ExtractArgs extract;
  auto * extract_cmd = app.add_subcommand("extract", "Extract training records");
  extract_cmd->add_option("--scenarios", extract.scenarios, "Scenario directory")->required();
  extract_cmd->add_option("--out", extract.out, "Output directory")->required();
  extract_cmd->add_flag("--tensors", extract.tensors, "Write the referenced raster tensors");
  extract_cmd->add_flag("--png", extract.png, "Write the referenced rasters as PNG");
  extract_cmd->add_option("--config", extract.config, "key=value config file; flags win");

  ScoreArgs score;
  auto * score_cmd =
    app.add_subcommand("score-prediction", "Score predicted raster tensors against ground truth");
  score_cmd->add_option("--pred", score.pred, "Directory of predicted dynamic rasters")->required();
  score_cmd->add_option("--truth", score.truth, "Directory of ground-truth rasters")->required();
  score_cmd->add_option("--env", score.env, "Directory of environment rasters (default empty)");
  score_cmd->add_option("--out", score.out, "Output JSON file (default stdout)");
  score_cmd->add_option("--config", score.config, "key=value config file; flags win");

  FixtureArgs fix;
  auto * fix_cmd = app.add_subcommand("make-fixtures", "Write the synthetic scenario fixtures");
  fix_cmd->add_option("--set", fix.set, "Fixture set")
    ->check(CLI::IsMember({"paper-scenes", "basic", "all"}))
    ->capture_default_str();
  fix_cmd->add_option("--out", fix.out, "Output directory")->capture_default_str();
  fix_cmd->add_option("--seed", fix.seed, "Jitter seed")->capture_default_str();
  fix_cmd->add_option("--config", fix.config, "key=value config file; flags win");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion &) {
    out << MINIDRIVE_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError & e) {
    err << error_line("E_USAGE", std::string(e.what()) + " (run with --help for usage)") << "\n";
    return kExitUsage;
  } catch (const Error & e) {
    err << error_line(e.code(), e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (*simulate) {
      return cmd_simulate(sim, out, err);
    }
    if (*eval_cmd) {
      return cmd_eval_decisions(eval, out, err);
    }
    if (*plan_cmd) {
      return cmd_plan(plan, out);
    }
    if (*extract_cmd) {
      return cmd_extract(extract, out, err);
    }
    if (*score_cmd) {
      return cmd_score_prediction(score, out);
    }
    return cmd_make_fixtures(fix, out);
  } catch (const UsageError & e) {
    err << error_line(e.code(), e.what()) << "\n";
    return kExitUsage;
  } catch (const Error & e) {
    err << error_line(e.code(), e.what()) << "\n";
    return kExitFailure;
  } catch (const std::exception & e) {
    err << error_line("E_INTERNAL", e.what()) << "\n";
    return kExitFailure;
  }
}

}  // namespace minidrive::cli
