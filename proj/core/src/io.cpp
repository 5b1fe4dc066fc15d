#include "plume/io.hpp"

#include "plume/snapshot.hpp"

#include <json.hpp>

#include <charconv>
#include <sstream>

namespace plume::io {

using json = nlohmann::json;

namespace {

json vec2(const std::optional<Vec2>& v) { return v ? json::array({v->x(), v->y()}) : json(); }
json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 get_vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
std::optional<Vec2> get_vec2(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Vec2{j.at(0).get<double>(), j.at(1).get<double>()};
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json();
}

template <typename T>
std::optional<T> get_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

sim::CameraMount parse_mount(const std::string& s) {
  if (s == "down") return sim::CameraMount::down;
  if (s == "forward") return sim::CameraMount::forward;
  throw ArtifactError("unknown camera mount '" + s + "'");
}

json scenario_json(const sim::WindScenario& s) {
  return {{"kind", sim::to_string(s.kind)}, {"v_base", s.v_base}, {"amp_x", s.amp_x},
          {"omega_x", s.omega_x},           {"amp_z", s.amp_z},   {"omega_z", s.omega_z}};
}

sim::WindScenario scenario_from(const json& j) {
  sim::WindScenario s;
  auto kind = sim::parse_scenario(j.at("kind").get<std::string>());
  if (!kind) throw ArtifactError("unknown scenario in log");
  s.kind = *kind;
  s.v_base = j.at("v_base").get<double>();
  s.amp_x = j.at("amp_x").get<double>();
  s.omega_x = j.at("omega_x").get<double>();
  s.amp_z = j.at("amp_z").get<double>();
  s.omega_z = j.at("omega_z").get<double>();
  return s;
}

json report_json(const metrics::MetricsReport& r) {
  return {{"mu_m", r.mu_m},       {"d_m_max", r.d_m_max}, {"mu_c", r.mu_c},
          {"d_c_max", r.d_c_max}, {"t_R", r.t_R},         {"samples", r.samples},
          {"excluded_frames", r.excluded_frames},         {"l_ref", r.l_ref}};
}

metrics::MetricsReport report_from(const json& j) {
  metrics::MetricsReport r;
  r.mu_m = j.at("mu_m").get<double>();
  r.d_m_max = j.at("d_m_max").get<double>();
  r.mu_c = j.at("mu_c").get<double>();
  r.d_c_max = j.at("d_c_max").get<double>();
  r.t_R = j.at("t_R").get<double>();
  r.samples = j.at("samples").get<int>();
  r.excluded_frames = j.at("excluded_frames").get<int>();
  r.l_ref = j.at("l_ref").get<double>();
  return r;
}

json record_json(const mission::TickRecord& r) {
  const auto& d = r.drone;
  json mask = {{"area", r.mask.area},
               {"centroid", vec2(r.mask.centroid)},
               {"bbox", r.mask.bbox ? json::array({r.mask.bbox->x_min, r.mask.bbox->y_min, r.mask.bbox->x_max,
                                                   r.mask.bbox->y_max})
                                    : json()},
               {"valid", r.mask.valid},
               {"mount", sim::to_string(r.mask.mount)}};
  return {{"type", "tick"},
          {"tick", r.tick},
          {"t", r.t},
          {"phase", mission::to_string(r.phase)},
          {"pose",
           {{"position", vec3(d.position)},
            {"velocity", vec3(d.velocity)},
            {"yaw", d.yaw},
            {"gimbal", sim::to_string(d.gimbal)}}},
          {"command",
           {{"vx", r.command.vx}, {"vy", r.command.vy}, {"vz", r.command.vz}, {"yaw_rate", r.command.yaw_rate}}},
          {"sensed", r.sensed},
          {"decided", r.decided},
          {"dispatched", r.dispatched},
          {"mask", mask},
          {"action", opt(r.action)},
          {"reward", opt(r.reward)},
          {"inside", r.inside},
          {"yaw_target", opt(r.yaw_target)},
          {"flow", vec2(r.flow)},
          {"since_valid", r.since_valid}};
}

mission::TickRecord record_from(const json& j) {
  mission::TickRecord r;
  r.tick = j.at("tick").get<long>();
  r.t = j.at("t").get<double>();
  auto phase = mission::parse_phase(j.at("phase").get<std::string>());
  if (!phase) throw ArtifactError("unknown phase in log");
  r.phase = *phase;
  const auto& p = j.at("pose");
  r.drone.position = get_vec3(p.at("position"));
  r.drone.velocity = get_vec3(p.at("velocity"));
  r.drone.yaw = p.at("yaw").get<double>();
  r.drone.gimbal = parse_mount(p.at("gimbal").get<std::string>());
  const auto& c = j.at("command");
  r.command = {c.at("vx").get<double>(), c.at("vy").get<double>(), c.at("vz").get<double>(),
               c.at("yaw_rate").get<double>()};
  r.sensed = j.at("sensed").get<bool>();
  r.decided = j.at("decided").get<bool>();
  r.dispatched = j.at("dispatched").get<bool>();
  const auto& m = j.at("mask");
  r.mask.area = m.at("area").get<long>();
  r.mask.centroid = get_vec2(m.at("centroid"));
  if (const auto& b = m.at("bbox"); !b.is_null())
    r.mask.bbox = sensor::BBox{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  r.mask.valid = m.at("valid").get<bool>();
  r.mask.mount = parse_mount(m.at("mount").get<std::string>());
  r.action = get_opt<int>(j.at("action"));
  r.reward = get_opt<double>(j.at("reward"));
  r.inside = j.at("inside").get<bool>();
  r.yaw_target = get_opt<double>(j.at("yaw_target"));
  r.flow = get_vec2(j.at("flow"));
  r.since_valid = j.at("since_valid").get<double>();
  return r;
}

void append(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

std::string encode_log(const mission::EpisodeLog& log, const config::RunConfig& cfg,
                       const std::optional<LogSummary>& summary) {
  const auto& info = log.info;
  json header = {{"type", "header"},
                 {"format", kLogFormat},
                 {"scenario", scenario_json(info.scenario)},
                 {"controller", mission::to_string(info.controller)},
                 {"seed", info.seed},
                 {"duration", info.duration},
                 {"config_hash", info.config_hash},
                 {"config", json::parse(config::to_json(cfg))}};
  std::string out = header.dump();
  out += '\n';
  for (const auto& r : log.records) {
    out += record_json(r).dump();
    out += '\n';
  }
  if (summary) {
    json s = {{"type", "summary"},
              {"completed", summary->completed},
              {"ticks", log.records.size()},
              {"metrics", summary->metrics ? report_json(*summary->metrics) : json()}};
    out += s.dump();
    out += '\n';
  }
  return out;
}

LoadedLog decode_log(std::string_view text) {
  LoadedLog out;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  try {
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      const auto line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header") throw ArtifactError("log does not start with a header");
        if (j.at("format").get<std::string>() != kLogFormat) throw ArtifactError("unsupported log format");
        auto& info = out.log.info;
        info.scenario = scenario_from(j.at("scenario"));
        auto ctrl = mission::parse_controller(j.at("controller").get<std::string>());
        if (!ctrl) throw ArtifactError("unknown controller in log");
        info.controller = *ctrl;
        info.seed = j.at("seed").get<std::uint64_t>();
        info.duration = j.at("duration").get<double>();
        info.config_hash = j.at("config_hash").get<std::string>();
        out.config_json = j.at("config").dump();
        out.config = config::from_json(out.config_json);
        have_header = true;
      } else if (type == "tick") {
        if (out.summary) throw ArtifactError("tick after summary");
        auto rec = record_from(j);
        if (!out.log.records.empty() && rec.tick <= out.log.records.back().tick)
          throw ArtifactError("ticks not strictly increasing");
        out.log.records.push_back(std::move(rec));
      } else if (type == "summary") {
        LogSummary s;
        s.completed = j.at("completed").get<bool>();
        if (!j.at("metrics").is_null()) s.metrics = report_from(j.at("metrics"));
        out.summary = s;
      } else {
        throw ArtifactError("unknown record type '" + type + "'");
      }
    }
  } catch (const ArtifactError& e) {
    throw ArtifactError("log line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ArtifactError("log line " + std::to_string(line_no) + ": embedded config: " + e.what());
  } catch (const json::exception& e) {
    throw ArtifactError("log line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) throw ArtifactError("empty log");
  return out;
}

void write_log(const std::filesystem::path& path, const mission::EpisodeLog& log, const config::RunConfig& cfg,
               const std::optional<LogSummary>& summary) {
  write_file_atomic(path, encode_log(log, cfg, summary));
}

LoadedLog read_log(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_log(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_number(double v) {
  std::string s;
  append(s, v);
  return s;
}

std::string report_csv_header() { return "scenario,controller,run,mu_m,d_m_max,mu_c,d_c_max,t_R,excluded_frames\n"; }

std::string report_csv_line(const ReportRow& row) {
  std::string s = csv_field(row.scenario) + ',' + csv_field(row.controller) + ',' + std::to_string(row.run);
  if (row.report) {
    for (double v : metrics::metric_values(*row.report)) {
      s += ',';
      append(s, v);
    }
    s += ',' + std::to_string(row.report->excluded_frames);
  } else {
    s += ",,,,,,";
  }
  return s + '\n';
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string s = report_csv_header();
  for (const auto& r : rows) s += report_csv_line(r);
  return s;
}

std::string aggregate_csv(const std::vector<AggregateLine>& lines) {
  std::string s = "scenario,controller";
  for (const char* name : metrics::kMetricNames) s += std::string(",") + name + "_mean," + name + "_std";
  s += ",runs,completed\n";
  for (const auto& l : lines) {
    s += csv_field(l.scenario) + ',' + csv_field(l.controller);
    for (const auto& st : l.row.stats) {
      s += ',';
      if (l.row.runs > 0) append(s, st.mean);
      s += ',';
      if (st.std) append(s, *st.std);
    }
    s += ',' + std::to_string(l.attempted) + ',' + std::to_string(l.row.runs) + '\n';
  }
  return s;
}

std::string curve_csv(const std::vector<rl::CurveRecord>& curve) {
  std::string s = "update,step,mean_reward,mean_inside_frac,policy_loss,value_loss,entropy,clip_frac\n";
  for (const auto& c : curve) {
    s += std::to_string(c.update) + ',' + std::to_string(c.step);
    for (double v : {c.mean_reward, c.mean_inside_frac, c.policy_loss, c.value_loss, c.entropy, c.clip_frac}) {
      s += ',';
      append(s, v);
    }
    s += '\n';
  }
  return s;
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string s;
  for (char c : text) {
    switch (c) {
      case '<': s += "&lt;"; break;
      case '>': s += "&gt;"; break;
      case '&': s += "&amp;"; break;
      case '"': s += "&quot;"; break;
      default: s += c;
    }
  }
  return s;
}

}  // namespace

std::string overlay_svg(int width, int height, const geom::Polygon& contour, const geom::Polyline& skeleton,
                        const std::vector<Vec2>& track, const std::string& title) {
  // Points are index coordinates (pixel centres); shift by half a pixel.
  auto points = [](const std::vector<Vec2>& pts) {
    std::string s;
    for (const auto& p : pts) {
      if (!s.empty()) s += ' ';
      append(s, p.x() + 0.5);
      s += ',';
      append(s, p.y() + 0.5);
    }
    return s;
  };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  o << "<title>" << xml_escape(title) << "</title>\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#202020\"/>\n";
  if (!contour.empty())
    o << "<polygon points=\"" << points(contour) << "\" fill=\"#9a9a9a\" fill-opacity=\"0.5\" stroke=\"#ff3030\" "
      << "stroke-width=\"1\"/>\n";
  if (skeleton.size() > 1)
    o << "<polyline points=\"" << points(skeleton) << "\" fill=\"none\" stroke=\"#30d030\" stroke-width=\"1.5\"/>\n";
  if (!track.empty()) {
    o << "<polyline points=\"" << points(track) << "\" fill=\"none\" stroke=\"#3080ff\" stroke-width=\"1\"/>\n";
    o << "<circle cx=\"" << format_number(track.back().x() + 0.5) << "\" cy=\""
      << format_number(track.back().y() + 0.5) << "\" r=\"2.5\" fill=\"#3080ff\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace plume::io
