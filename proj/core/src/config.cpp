#include "plume/config.hpp"

#include "plume/digest.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace plume::config {

using nlohmann::json;

namespace {

constexpr std::array<sim::ScenarioKind, 4> kKinds{sim::ScenarioKind::S, sim::ScenarioKind::UL, sim::ScenarioKind::UH,
                                                   sim::ScenarioKind::U3D};

json gains_json(const control::PidGains& g) {
  return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}, {"i_clamp", g.i_clamp}, {"out_clamp", g.out_clamp}};
}

control::PidGains gains_from(const json& j) {
  control::PidGains g;
  g.kp = j.at("kp").get<double>();
  g.ki = j.at("ki").get<double>();
  g.kd = j.at("kd").get<double>();
  g.i_clamp = j.at("i_clamp").get<double>();
  g.out_clamp = j.at("out_clamp").get<double>();
  return g;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_tree(const RunConfig& c) {
  json j;
  j["profile"] = c.profile;

  json sc;
  for (const auto k : kKinds) {
    const auto& w = c.scenario(k);
    sc[std::string(sim::to_string(k))] = {{"v_base", w.v_base}, {"amp_x", w.amp_x}, {"omega_x", w.omega_x},
                                          {"amp_z", w.amp_z},   {"omega_z", w.omega_z}};
  }
  j["scenarios"] = sc;

  const auto& p = c.physics;
  j["plume"] = {{"sigma0", p.plume.sigma0},           {"k_growth", p.plume.k_growth},
                {"emit_interval", p.plume.emit_interval}, {"strength", p.plume.strength},
                {"max_age", p.plume.max_age},         {"jitter", p.plume.jitter}};
  j["drone"] = {{"tau", p.drone.tau}, {"v_clamp", p.drone.v_clamp}, {"yaw_rate_clamp", p.drone.yaw_rate_clamp}};
  j["physics"] = {{"source", vec3_json(p.source)}, {"dt", p.dt}, {"rho_in", p.rho_in}};

  const auto& m = c.mission;
  j["camera"] = {{"width", m.camera.width},         {"height", m.camera.height},
                 {"focal", m.camera.focal},         {"min_depth", m.camera.min_depth},
                 {"max_depth", m.camera.max_depth}, {"rho_down", m.rho_down},
                 {"rho_forward", m.rho_forward},    {"area_min_frac", m.area_min_frac}};
  j["flow"] = {{"min_samples", m.flow_min_samples}, {"eps_var", m.flow_eps_var}, {"k_max", m.flow_k_max}};
  j["mission"] = {{"rate_seg", m.rate_seg},
                  {"rate_policy", m.rate_policy},
                  {"rate_cmd", m.rate_cmd},
                  {"target_altitude_offset", m.target_altitude_offset},
                  {"lost_timeout", m.lost_timeout},
                  {"lost_abort", m.lost_abort},
                  {"arm_delay", m.arm_delay},
                  {"start_north", m.start_north},
                  {"start_altitude", m.start_altitude},
                  {"start_jitter", m.start_jitter},
                  {"yaw_gain", m.yaw_gain},
                  {"yaw_tolerance_deg", m.yaw_tolerance_deg},
                  {"v_descend", m.v_descend},
                  {"v_sweep", m.v_sweep},
                  {"altitude_floor", m.altitude_floor},
                  {"v_climb", m.v_climb},
                  {"lost_ceiling", m.lost_ceiling},
                  {"v_forward", m.v_forward},
                  {"source_radius", m.source_radius}};
  j["pid"] = {{"descent_lateral", gains_json(m.descent_lateral)},
              {"descent_longitudinal", gains_json(m.descent_longitudinal)},
              {"inplume_lateral", gains_json(m.inplume_lateral)},
              {"inplume_vertical", gains_json(m.inplume_vertical)}};

  j["actions"] = {{"v_forward", c.actions.v_forward}, {"v_lat", c.actions.v_lat},
                  {"v_vert", c.actions.v_vert},       {"m", c.actions.m}};
  const auto& r = c.partition;
  j["regions"] = {{"f1", r.f1}, {"f2", r.f2}, {"f3", r.f3}, {"f4", r.f4}, {"g1", r.g1}, {"g2", r.g2}};
  j["rewards"] = {{"match", c.rewards.match}, {"mismatch", c.rewards.mismatch}, {"lost", c.rewards.lost}};

  json convs = json::array();
  for (const auto& cv : c.network.convs) convs.push_back({{"filters", cv.filters}, {"kernel", cv.kernel}, {"stride", cv.stride}});
  j["network"] = {{"height", c.network.height}, {"width", c.network.width}, {"convs", convs},
                  {"trunk", c.network.trunk}};

  const auto& q = c.ppo;
  j["ppo"] = {{"lr", q.lr},
              {"gamma", q.gamma},
              {"batch", q.batch},
              {"horizon", q.horizon},
              {"epochs", q.epochs},
              {"total_steps", q.total_steps},
              {"clip_eps", q.clip_eps},
              {"gae_lambda", q.gae_lambda},
              {"entropy_coef", q.entropy_coef},
              {"value_coef", q.value_coef},
              {"max_grad_norm", q.max_grad_norm},
              {"n_envs", q.n_envs},
              {"seed", q.seed},
              {"checkpoint_every", q.checkpoint_every}};

  const auto& t = c.training;
  j["training"] = {{"amp_jitter", t.randomization.amp_jitter},
                   {"freq_jitter", t.randomization.freq_jitter},
                   {"lost_steps", t.lost_steps},
                   {"max_steps", t.max_steps},
                   {"source_radius", t.source_radius},
                   {"spawn_min", t.spawn_min},
                   {"spawn_max", t.spawn_max},
                   {"spawn_lateral", t.spawn_lateral},
                   {"spawn_vertical", t.spawn_vertical},
                   {"spawn_yaw", t.spawn_yaw},
                   {"spinup_min", t.spinup_min},
                   {"spinup_max", t.spinup_max}};

  const auto& o = c.observer;
  j["observer"] = {{"ref_lat", o.ref_lat}, {"ref_lon", o.ref_lon},   {"east", o.east},
                   {"north", o.north},     {"altitude", o.altitude}, {"focal", o.focal},
                   {"width", o.width},     {"height", o.height},     {"rho_img", o.rho_img},
                   {"sample_rate", o.sample_rate}};
  j["metrics"] = {{"prune_len", c.skeleton.prune_len}, {"smooth_window", c.skeleton.smooth_window}};
  j["eval"] = {{"duration", c.eval_duration}};
  return j;
}

RunConfig from_tree(const json& j) {
  RunConfig c;
  c.profile = j.at("profile").get<std::string>();
  for (std::size_t i = 0; i < kKinds.size(); ++i) {
    const json& s = j.at("scenarios").at(std::string(sim::to_string(kKinds[i])));
    auto& w = c.scenarios[i];
    w.kind = kKinds[i];
    w.v_base = s.at("v_base").get<double>();
    w.amp_x = s.at("amp_x").get<double>();
    w.omega_x = s.at("omega_x").get<double>();
    w.amp_z = s.at("amp_z").get<double>();
    w.omega_z = s.at("omega_z").get<double>();
  }

  auto& p = c.physics;
  const json& pl = j.at("plume");
  p.plume.sigma0 = pl.at("sigma0").get<double>();
  p.plume.k_growth = pl.at("k_growth").get<double>();
  p.plume.emit_interval = pl.at("emit_interval").get<double>();
  p.plume.strength = pl.at("strength").get<double>();
  p.plume.max_age = pl.at("max_age").get<double>();
  p.plume.jitter = pl.at("jitter").get<double>();
  const json& dr = j.at("drone");
  p.drone.tau = dr.at("tau").get<double>();
  p.drone.v_clamp = dr.at("v_clamp").get<double>();
  p.drone.yaw_rate_clamp = dr.at("yaw_rate_clamp").get<double>();
  const json& ph = j.at("physics");
  const auto src = ph.at("source").get<std::vector<double>>();
  if (src.size() != 3) throw ConfigError("physics.source must have three components");
  p.source = Vec3(src[0], src[1], src[2]);
  p.dt = ph.at("dt").get<double>();
  p.rho_in = ph.at("rho_in").get<double>();

  auto& m = c.mission;
  const json& cam = j.at("camera");
  m.camera.width = cam.at("width").get<int>();
  m.camera.height = cam.at("height").get<int>();
  m.camera.focal = cam.at("focal").get<double>();
  m.camera.min_depth = cam.at("min_depth").get<double>();
  m.camera.max_depth = cam.at("max_depth").get<double>();
  m.rho_down = cam.at("rho_down").get<double>();
  m.rho_forward = cam.at("rho_forward").get<double>();
  m.area_min_frac = cam.at("area_min_frac").get<double>();
  const json& fl = j.at("flow");
  m.flow_min_samples = fl.at("min_samples").get<int>();
  m.flow_eps_var = fl.at("eps_var").get<double>();
  m.flow_k_max = fl.at("k_max").get<int>();
  const json& mi = j.at("mission");
  m.rate_seg = mi.at("rate_seg").get<double>();
  m.rate_policy = mi.at("rate_policy").get<double>();
  m.rate_cmd = mi.at("rate_cmd").get<double>();
  m.target_altitude_offset = mi.at("target_altitude_offset").get<double>();
  m.lost_timeout = mi.at("lost_timeout").get<double>();
  m.lost_abort = mi.at("lost_abort").get<double>();
  m.arm_delay = mi.at("arm_delay").get<double>();
  m.start_north = mi.at("start_north").get<double>();
  m.start_altitude = mi.at("start_altitude").get<double>();
  m.start_jitter = mi.at("start_jitter").get<double>();
  m.yaw_gain = mi.at("yaw_gain").get<double>();
  m.yaw_tolerance_deg = mi.at("yaw_tolerance_deg").get<double>();
  m.v_descend = mi.at("v_descend").get<double>();
  m.v_sweep = mi.at("v_sweep").get<double>();
  m.altitude_floor = mi.at("altitude_floor").get<double>();
  m.v_climb = mi.at("v_climb").get<double>();
  m.lost_ceiling = mi.at("lost_ceiling").get<double>();
  m.v_forward = mi.at("v_forward").get<double>();
  m.source_radius = mi.at("source_radius").get<double>();
  const json& pid = j.at("pid");
  m.descent_lateral = gains_from(pid.at("descent_lateral"));
  m.descent_longitudinal = gains_from(pid.at("descent_longitudinal"));
  m.inplume_lateral = gains_from(pid.at("inplume_lateral"));
  m.inplume_vertical = gains_from(pid.at("inplume_vertical"));

  const json& a = j.at("actions");
  c.actions.v_forward = a.at("v_forward").get<double>();
  c.actions.v_lat = a.at("v_lat").get<double>();
  c.actions.v_vert = a.at("v_vert").get<double>();
  c.actions.m = a.at("m").get<double>();
  const json& r = j.at("regions");
  c.partition = {r.at("f1").get<double>(), r.at("f2").get<double>(), r.at("f3").get<double>(),
                 r.at("f4").get<double>(), r.at("g1").get<double>(), r.at("g2").get<double>()};
  const json& rw = j.at("rewards");
  c.rewards = {rw.at("match").get<double>(), rw.at("mismatch").get<double>(), rw.at("lost").get<double>()};

  const json& n = j.at("network");
  c.network.height = n.at("height").get<int>();
  c.network.width = n.at("width").get<int>();
  c.network.trunk = n.at("trunk").get<int>();
  c.network.convs.clear();
  for (const json& cv : n.at("convs"))
    c.network.convs.push_back({cv.at("filters").get<int>(), cv.at("kernel").get<int>(), cv.at("stride").get<int>()});

  const json& q = j.at("ppo");
  c.ppo.lr = q.at("lr").get<double>();
  c.ppo.gamma = q.at("gamma").get<double>();
  c.ppo.batch = q.at("batch").get<int>();
  c.ppo.horizon = q.at("horizon").get<int>();
  c.ppo.epochs = q.at("epochs").get<int>();
  c.ppo.total_steps = q.at("total_steps").get<long>();
  c.ppo.clip_eps = q.at("clip_eps").get<double>();
  c.ppo.gae_lambda = q.at("gae_lambda").get<double>();
  c.ppo.entropy_coef = q.at("entropy_coef").get<double>();
  c.ppo.value_coef = q.at("value_coef").get<double>();
  c.ppo.max_grad_norm = q.at("max_grad_norm").get<double>();
  c.ppo.n_envs = q.at("n_envs").get<int>();
  c.ppo.seed = q.at("seed").get<std::uint64_t>();
  c.ppo.checkpoint_every = q.at("checkpoint_every").get<int>();

  const json& t = j.at("training");
  c.training.randomization.amp_jitter = t.at("amp_jitter").get<double>();
  c.training.randomization.freq_jitter = t.at("freq_jitter").get<double>();
  c.training.lost_steps = t.at("lost_steps").get<int>();
  c.training.max_steps = t.at("max_steps").get<int>();
  c.training.source_radius = t.at("source_radius").get<double>();
  c.training.spawn_min = t.at("spawn_min").get<double>();
  c.training.spawn_max = t.at("spawn_max").get<double>();
  c.training.spawn_lateral = t.at("spawn_lateral").get<double>();
  c.training.spawn_vertical = t.at("spawn_vertical").get<double>();
  c.training.spawn_yaw = t.at("spawn_yaw").get<double>();
  c.training.spinup_min = t.at("spinup_min").get<double>();
  c.training.spinup_max = t.at("spinup_max").get<double>();

  const json& o = j.at("observer");
  c.observer.ref_lat = o.at("ref_lat").get<double>();
  c.observer.ref_lon = o.at("ref_lon").get<double>();
  c.observer.east = o.at("east").get<double>();
  c.observer.north = o.at("north").get<double>();
  c.observer.altitude = o.at("altitude").get<double>();
  c.observer.focal = o.at("focal").get<double>();
  c.observer.width = o.at("width").get<int>();
  c.observer.height = o.at("height").get<int>();
  c.observer.rho_img = o.at("rho_img").get<double>();
  c.observer.sample_rate = o.at("sample_rate").get<double>();
  c.skeleton.prune_len = j.at("metrics").at("prune_len").get<int>();
  c.skeleton.smooth_window = j.at("metrics").at("smooth_window").get<int>();
  c.eval_duration = j.at("eval").at("duration").get<double>();
  return c;
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // Integers may not silently take fractional values.
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

// Overlays `user` on `base`, rejecting keys and types that base does not have.
void merge_strict(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config: " + (path.empty() ? std::string("root") : path) + " must be a mapping");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else if (slot.is_array()) {
      if (!it.value().is_array()) throw ConfigError("config: '" + key + "' must be a list");
      const json proto = slot.empty() ? json() : slot.front();
      json out = json::array();
      for (const json& e : it.value()) {
        if (proto.is_object()) {
          json item = proto;
          merge_strict(item, e, key + "[]");
          out.push_back(item);
        } else {
          if (!proto.is_null() && !same_kind(proto, e)) throw ConfigError("config: wrong type in '" + key + "'");
          out.push_back(e);
        }
      }
      slot = out;
    } else {
      if (!same_kind(slot, it.value())) throw ConfigError("config: wrong type for '" + key + "'");
      if (slot.is_number_float())
        slot = it.value().get<double>();
      else
        slot = it.value();
    }
  }
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return json();
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(yaml_to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      if (s == "true") return true;
      if (s == "false") return false;
      long long iv = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
      if (ec == std::errc() && p == s.data() + s.size()) return iv;
      double dv = 0.0;
      auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), dv);
      if (ec2 == std::errc() && q == s.data() + s.size()) return dv;
      return s;
    }
  }
  return json();
}

}  // namespace

void RunConfig::validate() const {
  if (profile != "desk" && profile != "paper") throw ConfigError("config: profile must be desk or paper");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& w = scenarios[i];
    if (w.amp_x < 0 || w.amp_z < 0 || w.omega_x < 0 || w.omega_z < 0)
      throw ConfigError("config: scenario amplitudes and frequencies must be non-negative");
  }
  const auto& pl = physics.plume;
  if (!(pl.sigma0 > 0 && pl.k_growth >= 0 && pl.emit_interval > 0 && pl.strength > 0 && pl.max_age > 0 &&
        pl.jitter >= 0))
    throw ConfigError("config: invalid plume parameters");
  if (!(physics.dt > 0 && physics.rho_in > 0 && physics.drone.tau > 0 && physics.drone.v_clamp > 0 &&
        physics.drone.yaw_rate_clamp > 0))
    throw ConfigError("config: invalid physics parameters");
  mission.validate(physics.dt);
  actions.validate();
  partition.validate();
  network.validate();
  if (network.actions != rl::kNumActions) throw ConfigError("config: network must have seven actions");
  ppo.validate();
  if (training.lost_steps <= 0 || training.max_steps <= 0 || !(training.spawn_min <= training.spawn_max) ||
      !(training.spinup_min <= training.spinup_max))
    throw ConfigError("config: invalid training environment");
  if (!(observer.altitude > 0 && observer.focal > 0 && observer.width > 0 && observer.height > 0 &&
        observer.rho_img > 0 && observer.sample_rate > 0))
    throw ConfigError("config: invalid observer");
  const double every = 1.0 / (observer.sample_rate * physics.dt);
  if (std::abs(every - std::round(every)) > 1e-9 * every) throw ConfigError("config: observer.sample_rate must divide the tick rate");
  if (skeleton.prune_len < 0 || skeleton.smooth_window < 1) throw ConfigError("config: invalid skeleton parameters");
  if (!(eval_duration > 0)) throw ConfigError("config: eval.duration must be positive");
}

RunConfig default_config(std::string_view profile) {
  RunConfig c;
  if (profile == "desk") {
    c.profile = "desk";
    c.network = nn::NetworkSpec::desk();
    c.ppo.total_steps = 200'000;
  } else if (profile == "paper") {
    c.profile = "paper";
    c.network = nn::NetworkSpec::paper();
    c.ppo.total_steps = 1'000'000;
  } else {
    throw ConfigError("unknown profile '" + std::string(profile) + "'");
  }
  return c;
}

std::string to_json(const RunConfig& cfg) { return to_tree(cfg).dump(); }

RunConfig from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const std::string profile = j.is_object() && j.contains("profile") && j["profile"].is_string()
                                  ? j["profile"].get<std::string>()
                                  : std::string("desk");
  json base = to_tree(default_config(profile));
  merge_strict(base, j, "");
  try {
    RunConfig c = from_tree(base);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig parse_config(std::string_view yaml, const std::optional<std::string>& profile_override) {
  json user;
  try {
    const YAML::Node root = YAML::Load(std::string(yaml));
    user = yaml_to_json(root);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (user.is_null()) user = json::object();
  if (!user.is_object()) throw ConfigError("config: top level must be a mapping");
  if (profile_override) user["profile"] = *profile_override;
  return from_json(user.dump());
}

RunConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& profile_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), profile_override);
}

std::string config_hash(const RunConfig& cfg) {
  const auto d = sha256(to_json(cfg));
  return to_hex(d);
}

rl::PlumeEnvConfig train_env_config(const RunConfig& c) {
  rl::PlumeEnvConfig e;
  e.scenarios = c.scenarios;
  e.randomization = c.training.randomization;
  e.physics = c.physics;
  e.camera = c.mission.camera.resized(c.network.width, c.network.height);
  e.camera.mount = sim::CameraMount::forward;
  e.rho_img = c.mission.rho_forward;
  e.area_min_frac = c.mission.area_min_frac;
  e.actions = c.actions;
  e.partition = c.partition;
  e.rewards = c.rewards;
  e.decision_dt = 1.0 / c.mission.rate_policy;
  e.lost_steps = c.training.lost_steps;
  e.source_radius = c.training.source_radius;
  e.max_steps = c.training.max_steps;
  e.spawn_min = c.training.spawn_min;
  e.spawn_max = c.training.spawn_max;
  e.spawn_lateral = c.training.spawn_lateral;
  e.spawn_vertical = c.training.spawn_vertical;
  e.spawn_yaw = c.training.spawn_yaw;
  e.spinup_min = c.training.spinup_min;
  e.spinup_max = c.training.spinup_max;
  return e;
}

std::optional<std::string> env_profile() {
  const char* v = std::getenv("PLUME_PROFILE");
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("PLUME_SEED");
  if (!v || !*v) return std::nullopt;
  std::uint64_t s = 0;
  const std::string_view sv(v);
  auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), s);
  if (ec != std::errc() || p != sv.data() + sv.size()) throw ConfigError("PLUME_SEED must be an unsigned integer");
  return s;
}

}  // namespace plume::config
