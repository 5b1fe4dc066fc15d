#include "cli.hpp"

#include "selfcheck.hpp"

#include "plume/config.hpp"
#include "plume/eval.hpp"
#include "plume/io.hpp"
#include "plume/rl/env.hpp"
#include "plume/snapshot.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <sstream>

namespace plume::cli {
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string profile;
};

config::RunConfig load(const Common& c) {
  std::optional<std::string> profile;
  if (!c.profile.empty())
    profile = c.profile;
  else
    profile = config::env_profile();
  if (!c.config.empty()) return config::load_config(c.config, profile);
  auto cfg = config::default_config(profile.value_or("desk"));
  cfg.validate();
  return cfg;
}

std::uint64_t pick_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (auto e = config::env_seed()) return *e;
  return fallback;
}

sim::ScenarioKind scenario_arg(const std::string& s) {
  auto k = sim::parse_scenario(s);
  if (!k) throw ConfigError("unknown scenario '" + s + "' (expected S, UL, UH or U3D)");
  return *k;
}

mission::ControllerKind controller_arg(const std::string& s) {
  auto k = mission::parse_controller(s);
  if (!k) throw ConfigError("unknown controller '" + s + "' (expected pid or drl)");
  return *k;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string upper(std::string_view s) {
  std::string o(s);
  std::transform(o.begin(), o.end(), o.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return o;
}

std::unique_ptr<rl::PolicySnapshot> load_policy(const std::string& path, const config::RunConfig& cfg,
                                                std::ostream& err) {
  if (path.empty()) throw ConfigError("the drl controller needs --policy");
  std::string hash;
  auto snap = std::make_unique<rl::PolicySnapshot>(io::load_snapshot(path, &hash));
  if (snap->spec != cfg.network) err << "warning: policy network differs from the configured network\n";
  return snap;
}

void write_frames(const fs::path& dir, const std::vector<std::pair<int, sensor::SegMask>>& frames) {
  fs::create_directories(dir);
  for (const auto& [i, m] : frames) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.pgm", i);
    sensor::write_pgm(dir / name, m);
  }
}

std::string stem_of(sim::ScenarioKind s, mission::ControllerKind c, std::uint64_t seed) {
  return std::string(sim::to_string(s)) + "_" + std::string(mission::to_string(c)) + "_seed" + std::to_string(seed);
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  Common common;
  std::string scenario = "S";
  std::string controller = "pid";
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string out = "out";
  bool frames = false;
  bool svg = false;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const auto base = load(a.common);
  const auto scenario = scenario_arg(a.scenario);
  const auto controller = controller_arg(a.controller);
  const std::uint64_t seed = pick_seed(a.seed, 0);
  const double duration = a.duration.value_or(base.eval_duration);
  if (!(duration > 0.0)) throw ConfigError("--duration must be positive");
  std::unique_ptr<rl::PolicySnapshot> policy;
  if (controller == mission::ControllerKind::drl) policy = load_policy(a.policy, base, err);

  const auto cfg = eval::with_controller(base, controller);
  const auto log = eval::run_mission(cfg, scenario, controller, seed, duration, policy.get());
  std::vector<std::pair<int, sensor::SegMask>> frames;
  eval::FrameSink sink;
  if (a.frames) sink = [&](int i, long, const sensor::SegMask& m) { frames.emplace_back(i, m); };
  const auto scored = eval::score_episode(log, cfg, sink);

  const fs::path dir = a.out;
  const std::string stem = stem_of(scenario, controller, seed);
  io::write_log(dir / (stem + ".jsonl"), log, cfg, io::LogSummary{scored.report.has_value(), scored.report});
  io::ReportRow row{std::string(sim::to_string(scenario)), upper(mission::to_string(controller)), 0, scored.report};
  io::write_file_atomic(dir / (stem + ".csv"), io::report_csv({row}));
  if (a.frames) write_frames(dir / (stem + "_frames"), frames);
  if (a.svg)
    io::write_file_atomic(dir / (stem + ".svg"),
                          io::overlay_svg(cfg.observer.width, cfg.observer.height, scored.contour, scored.skeleton,
                                          scored.track, stem));

  out << "phase " << mission::to_string(log.records.empty() ? mission::Phase::Hover : log.records.back().phase)
      << " after " << log.records.size() << " ticks\n";
  if (scored.report) {
    const auto& r = *scored.report;
    out << "mu_m " << io::format_number(r.mu_m) << " d_m_max " << io::format_number(r.d_m_max) << " mu_c "
        << io::format_number(r.mu_c) << " d_c_max " << io::format_number(r.d_c_max) << " t_R "
        << io::format_number(r.t_R) << " samples " << r.samples << "\n";
  } else {
    err << "warning: the drone never reached the plume; run not scored\n";
  }
  out << "wrote " << (dir / (stem + ".jsonl")).string() << "\n";
  return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string out;
  std::string resume;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = load(a.common);
  cfg.ppo.seed = pick_seed(std::nullopt, cfg.ppo.seed);
  const std::string hash = config::config_hash(cfg);
  const fs::path policy_path = a.out;
  fs::path ckpt_path = policy_path;
  ckpt_path += ".ckpt";
  fs::path curve_path = policy_path;
  curve_path.replace_extension(".curve.csv");

  std::optional<rl::TrainState> resume;
  if (!a.resume.empty()) {
    std::string ckpt_hash;
    auto ck = io::load_checkpoint(a.resume, &ckpt_hash);
    if (ck.policy.spec != cfg.network) throw ArtifactError("checkpoint network does not match the configuration");
    if (ckpt_hash != hash) err << "warning: checkpoint was written under a different configuration\n";
    resume = ck.train_state();
  }

  const auto env_cfg = config::train_env_config(cfg);
  rl::EnvFactory factory = [env_cfg](int, std::uint64_t seed) -> std::unique_ptr<rl::Environment> {
    return std::make_unique<rl::PlumeEnv>(env_cfg, seed);
  };
  rl::TrainHooks hooks;
  hooks.on_checkpoint = [&](const rl::TrainState& s) {
    io::save_checkpoint(ckpt_path, io::Checkpoint::from(s, cfg.network, cfg.actions, cfg.partition), hash);
    io::write_file_atomic(curve_path, io::curve_csv(s.curve));
  };
  hooks.on_update = [&](const rl::TrainState& s) {
    const auto& c = s.curve.back();
    out << "update " << c.update << " step " << c.step << " reward " << io::format_number(c.mean_reward)
        << " inside " << io::format_number(c.mean_inside_frac) << " entropy " << io::format_number(c.entropy)
        << std::endl;
    return true;
  };

  rl::TrainState state;
  try {
    state = rl::train(cfg.network, cfg.ppo, factory, hooks, resume ? &*resume : nullptr);
  } catch (const rl::TrainingAbort& e) {
    err << "training aborted: " << e.what() << "\n";
    if (fs::exists(ckpt_path)) err << "last checkpoint kept at " << ckpt_path.string() << "\n";
    return kTrainAbort;
  }
  io::save_snapshot(policy_path, {cfg.network, cfg.actions, cfg.partition, state.params}, hash);
  out << "wrote " << policy_path.string() << " after " << state.steps_done << " steps\n";
  return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string scenarios = "S,UL,UH,U3D";
  std::string controllers = "pid,drl";
  int runs = 5;
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::string out = "eval";
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto base = load(a.common);
  if (a.runs < 1) throw ConfigError("--runs must be at least 1");
  std::vector<sim::ScenarioKind> scenarios;
  for (const auto& s : split(a.scenarios)) scenarios.push_back(scenario_arg(s));
  std::vector<mission::ControllerKind> controllers;
  for (const auto& c : split(a.controllers)) controllers.push_back(controller_arg(c));
  std::sort(scenarios.begin(), scenarios.end());
  scenarios.erase(std::unique(scenarios.begin(), scenarios.end()), scenarios.end());
  std::sort(controllers.begin(), controllers.end());
  controllers.erase(std::unique(controllers.begin(), controllers.end()), controllers.end());
  if (scenarios.empty() || controllers.empty()) throw ConfigError("nothing to evaluate");

  std::unique_ptr<rl::PolicySnapshot> policy;
  if (std::find(controllers.begin(), controllers.end(), mission::ControllerKind::drl) != controllers.end())
    policy = load_policy(a.policy, base, err);

  const std::uint64_t seed0 = pick_seed(a.seed, 0);
  const fs::path dir = a.out;
  std::vector<io::ReportRow> rows;
  std::vector<io::AggregateLine> lines;
  for (auto s : scenarios) {
    for (auto c : controllers) {
      const auto cfg = eval::with_controller(base, c);
      std::vector<metrics::MetricsReport> done;
      for (int i = 0; i < a.runs; ++i) {
        const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
        io::ReportRow row{std::string(sim::to_string(s)), upper(mission::to_string(c)), i, std::nullopt};
        try {
          const auto log = eval::run_mission(cfg, s, c, seed, cfg.eval_duration, policy.get());
          const auto scored = eval::score_episode(log, cfg);
          row.report = scored.report;
          io::write_log(dir / "logs" / (stem_of(s, c, seed) + ".jsonl"), log, cfg,
                        io::LogSummary{scored.report.has_value(), scored.report});
        } catch (const std::exception& e) {
          err << "run " << row.scenario << "/" << row.controller << "/" << i << " failed: " << e.what() << "\n";
        }
        if (row.report)
          done.push_back(*row.report);
        else
          err << "run " << row.scenario << "/" << row.controller << "/" << i << " did not complete\n";
        out << row.scenario << " " << row.controller << " run " << i << ": "
            << (row.report ? "t_R " + io::format_number(row.report->t_R) : std::string("incomplete")) << std::endl;
        rows.push_back(std::move(row));
      }
      lines.push_back({std::string(sim::to_string(s)), upper(mission::to_string(c)), metrics::aggregate(done),
                       a.runs});
    }
  }
  io::write_file_atomic(dir / "runs.csv", io::report_csv(rows));
  io::write_file_atomic(dir / "aggregate.csv", io::aggregate_csv(lines));
  out << "wrote " << (dir / "runs.csv").string() << " and " << (dir / "aggregate.csv").string() << "\n";
  return kOk;
}

// ---- replay ----------------------------------------------------------------

struct ReplayArgs {
  std::string log;
  bool frames = false;
  bool svg = false;
  bool strict = false;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  const auto loaded = io::read_log(a.log);
  bool mismatch = false;
  const std::string hash = config::config_hash(loaded.config);
  if (hash != loaded.log.info.config_hash) {
    err << "warning: log config hash " << loaded.log.info.config_hash << " does not match its config (" << hash
        << ")\n";
    mismatch = true;
  }
  std::vector<std::pair<int, sensor::SegMask>> frames;
  eval::FrameSink sink;
  if (a.frames) sink = [&](int i, long, const sensor::SegMask& m) { frames.emplace_back(i, m); };
  const auto scored = eval::score_episode(loaded.log, loaded.config, sink);

  if (!loaded.summary) {
    err << "warning: log has no summary line\n";
    mismatch = true;
  } else if (loaded.summary->metrics != scored.report) {
    err << "warning: recomputed metrics differ from the logged metrics\n";
    mismatch = true;
  }
  const fs::path log_path = a.log;
  const fs::path stem = log_path.parent_path() / log_path.stem();
  if (a.frames) write_frames(fs::path(stem.string() + "_replay_frames"), frames);
  if (a.svg)
    io::write_file_atomic(fs::path(stem.string() + "_replay.svg"),
                          io::overlay_svg(loaded.config.observer.width, loaded.config.observer.height, scored.contour,
                                          scored.skeleton, scored.track, log_path.stem().string()));
  if (scored.report) {
    out << io::report_csv_header()
        << io::report_csv_line({std::string(sim::to_string(loaded.log.info.scenario.kind)),
                                upper(mission::to_string(loaded.log.info.controller)), 0, scored.report});
  } else {
    out << "episode never reached the plume; nothing to score\n";
  }
  out << (mismatch ? "replay: MISMATCH\n" : "replay: metrics reproduced exactly\n");
  return mismatch && a.strict ? kReplayMismatch : kOk;
}

// ---- check -----------------------------------------------------------------

int cmd_check(std::ostream& out) {
  bool all = true;
  for (const auto& item : run_self_checks()) {
    out << (item.pass ? "PASS " : "FAIL ") << item.name << ": " << item.detail << "\n";
    all = all && item.pass;
  }
  return all ? kOk : kFailure;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "YAML configuration file")->check(CLI::ExistingFile);
  app->add_option("--profile", c.profile, "desk or paper (overrides PLUME_PROFILE)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smoke plume tracking simulator: PID and PPO controllers with image-space metrics", "plume"};
  app.require_subcommand(1);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Fly and score one episode");
  add_common(c_run, run.common);
  c_run->add_option("--scenario", run.scenario, "S, UL, UH or U3D");
  c_run->add_option("--controller", run.controller, "pid or drl");
  c_run->add_option("--policy", run.policy, "policy snapshot for the drl controller");
  c_run->add_option("--seed", run.seed, "episode seed (overrides PLUME_SEED)");
  c_run->add_option("--duration", run.duration, "simulated seconds");
  c_run->add_option("--out", run.out, "output directory");
  c_run->add_flag("--frames", run.frames, "write observer frames as PGM");
  c_run->add_flag("--svg", run.svg, "write an SVG overlay");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a policy with PPO");
  add_common(c_train, train.common);
  c_train->add_option("--out", train.out, "policy snapshot path")->required();
  c_train->add_option("--resume", train.resume, "checkpoint to continue from");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Score the scenario x controller cross product");
  add_common(c_eval, ev.common);
  c_eval->add_option("--scenarios", ev.scenarios, "comma-separated scenarios");
  c_eval->add_option("--controllers", ev.controllers, "comma-separated controllers");
  c_eval->add_option("--runs", ev.runs, "runs per cell, seeds base+i");
  c_eval->add_option("--policy", ev.policy, "policy snapshot for the drl controller");
  c_eval->add_option("--seed", ev.seed, "base seed (overrides PLUME_SEED)");
  c_eval->add_option("--out", ev.out, "output directory");

  ReplayArgs rp;
  auto* c_replay = app.add_subcommand("replay", "Recompute metrics from an episode log");
  c_replay->add_option("--log", rp.log, "episode log")->required();
  c_replay->add_flag("--frames", rp.frames, "write observer frames as PGM");
  c_replay->add_flag("--svg", rp.svg, "write an SVG overlay");
  c_replay->add_flag("--strict", rp.strict, "exit 5 on any mismatch");

  auto* c_check = app.add_subcommand("check", "Run the built-in verification suite");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }

  try {
    if (c_run->parsed()) return cmd_run(run, out, err);
    if (c_train->parsed()) return cmd_train(train, out, err);
    if (c_eval->parsed()) return cmd_eval(ev, out, err);
    if (c_replay->parsed()) return cmd_replay(rp, out, err);
    if (c_check->parsed()) return cmd_check(out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ArtifactError& e) {
    err << "artifact error: " << e.what() << "\n";
    return kArtifact;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace plume::cli
