#include <doctest.h>

#include "plume/config.hpp"
#include "plume/digest.hpp"
#include "plume/eval.hpp"
#include "plume/io.hpp"
#include "plume/snapshot.hpp"

#include <filesystem>
#include <fstream>

using namespace plume;
namespace fs = std::filesystem;

namespace {

rl::PolicySnapshot tiny_policy(std::uint64_t seed) {
  rl::PolicySnapshot s;
  s.spec.height = 16;
  s.spec.width = 16;
  s.spec.convs = {{4, 4, 2}, {8, 3, 2}};
  s.spec.trunk = 16;
  Rng rng(seed);
  s.params = nn::init_parameters<float>(s.spec, rng, 0.5);
  return s;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "plume_test_config_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("digest") {
  CHECK(to_hex(sha256(std::string_view("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config layering and validation") {
  const auto desk = config::default_config("desk");
  CHECK(desk.network.width == 64);
  CHECK(desk.ppo.total_steps == 200000);
  const auto paper = config::default_config("paper");
  CHECK(paper.network.width == 320);
  CHECK_THROWS_AS(config::default_config("nope"), ConfigError);

  const auto c = config::parse_config("ppo:\n  lr: 0.001\n");
  CHECK(c.ppo.lr == 0.001);
  CHECK(c.ppo.batch == desk.ppo.batch);

  CHECK(config::parse_config("profile: paper\n").network.width == 320);
  CHECK(config::parse_config("profile: paper\n", std::string("desk")).network.width == 64);

  CHECK_THROWS_AS(config::parse_config("ppo:\n  bogus: 1\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("nonsense: 1\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("ppo:\n  batch: 2.5\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("ppo:\n  lr: fast\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("mission:\n  rate_seg: 7\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("ppo:\n  batch: 300\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_config("ppo: [\n"), ConfigError);
}

TEST_CASE("shipped default config matches the built-in defaults") {
  const auto cfg = config::load_config(PLUME_CONFIG_DIR "/default.yaml");
  CHECK(config::to_json(cfg) == config::to_json(config::default_config()));
}

TEST_CASE("canonical json") {
  auto c = config::default_config("desk");
  const auto text = config::to_json(c);
  const auto back = config::from_json(text);
  CHECK(config::to_json(back) == text);
  CHECK(config::config_hash(back) == config::config_hash(c));
  CHECK(config::config_hash(c).size() == 64);

  c.physics.plume.k_growth = 0.051;
  CHECK(config::config_hash(c) != config::config_hash(back));
  CHECK_THROWS_AS(config::from_json("{\"extra\": 1}"), ConfigError);
}

TEST_CASE("policy snapshots") {
  const auto snap = tiny_policy(1);
  const auto bytes = io::encode_snapshot(snap, "abc123");
  std::string hash;
  const auto back = io::decode_snapshot(bytes, &hash);
  CHECK(hash == "abc123");
  CHECK(back.spec == snap.spec);
  CHECK(back.params.tensors == snap.params.tensors);
  CHECK(io::encode_snapshot(back, hash) == bytes);

  SUBCASE("file round trip gives bit-identical outputs") {
    const auto path = scratch("p.plmp");
    io::save_snapshot(path, snap, "h");
    const auto loaded = io::load_snapshot(path);
    sensor::SegMask m(16, 16);
    for (int i = 0; i < 16; ++i) m.set(i, (i * 7) % 16);
    m.refresh();
    const auto a = nn::forward(snap.spec, snap.params, rl::make_batch(snap.spec, m));
    const auto b = nn::forward(loaded.spec, loaded.params, rl::make_batch(loaded.spec, m));
    CHECK(a.logits == b.logits);
    CHECK(a.values == b.values);
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  }
  SUBCASE("any flipped byte is rejected") {
    for (std::size_t i : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
      auto bad = bytes;
      bad[i] ^= 0x40;
      CHECK_THROWS_AS(io::decode_snapshot(bad), ArtifactError);
    }
  }
  SUBCASE("truncation is rejected") {
    auto cut = bytes;
    cut.resize(cut.size() - 40);
    CHECK_THROWS_AS(io::decode_snapshot(cut), ArtifactError);
    CHECK_THROWS_AS(io::decode_snapshot(std::vector<std::uint8_t>{}), ArtifactError);
  }
  SUBCASE("a policy is not a checkpoint") {
    CHECK_THROWS_AS(io::decode_checkpoint(bytes), ArtifactError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(io::load_snapshot(scratch("absent.plmp")), ArtifactError);
  }
}

TEST_CASE("checkpoints") {
  io::Checkpoint ck;
  ck.policy = tiny_policy(2);
  ck.opt = nn::AdamState<float>::zeros_like(ck.policy.params, 1e-3);
  ck.opt.step = 7;
  ck.opt.m[0][0] = 0.25f;
  ck.opt.v[1][0] = 3.5f;
  ck.update = 3;
  ck.steps_done = 4096;
  ck.curve.push_back({1, 1024, 0.5, 0.25, -0.01, 0.3, 1.9, 0.1});
  ck.curve.push_back({2, 2048, 0.6, 0.35, -0.02, 0.2, 1.8, 0.05});
  const auto bytes = io::encode_checkpoint(ck, "cfg");
  const auto back = io::decode_checkpoint(bytes);
  CHECK(back.update == 3);
  CHECK(back.steps_done == 4096);
  CHECK(back.curve == ck.curve);
  CHECK(back.opt.m == ck.opt.m);
  CHECK(back.opt.v == ck.opt.v);
  CHECK(back.opt.step == 7);
  CHECK(back.opt.lr == 1e-3);
  CHECK(io::encode_checkpoint(back, "cfg") == bytes);
  // A checkpoint also serves as a policy.
  CHECK(io::decode_snapshot(bytes).params.tensors == ck.policy.params.tensors);
}

TEST_CASE("episode logs") {
  const auto cfg = config::default_config("desk");
  const auto log = eval::run_mission(cfg, sim::ScenarioKind::UL, mission::ControllerKind::pid, 4, 20.0);
  io::LogSummary summary;
  summary.completed = false;
  const auto text = io::encode_log(log, eval::with_controller(cfg, mission::ControllerKind::pid), summary);
  const auto loaded = io::decode_log(text);
  CHECK(loaded.log.records == log.records);
  CHECK(loaded.log.info.seed == 4);
  CHECK(loaded.log.info.config_hash == log.info.config_hash);
  CHECK(loaded.log.info.scenario.amp_x == log.info.scenario.amp_x);
  REQUIRE(loaded.summary.has_value());
  CHECK_FALSE(loaded.summary->completed);
  CHECK(config::config_hash(loaded.config) == log.info.config_hash);
  CHECK(io::encode_log(loaded.log, loaded.config, loaded.summary) == text);

  SUBCASE("malformed logs") {
    CHECK_THROWS_AS(io::decode_log("not json\n"), ArtifactError);
    CHECK_THROWS_AS(io::decode_log(""), ArtifactError);
    // Swap two tick lines so ticks are no longer increasing.
    const auto a = text.find('\n') + 1;
    const auto b = text.find('\n', a) + 1;
    const auto c = text.find('\n', b) + 1;
    const std::string swapped = text.substr(0, a) + text.substr(b, c - b) + text.substr(a, b - a) + text.substr(c);
    CHECK_THROWS_AS(io::decode_log(swapped), ArtifactError);
  }
}

TEST_CASE("csv tables") {
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(100.0) == "100");
  CHECK(io::format_number(-2.5) == "-2.5");
  CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);

  CHECK(io::report_csv_header() == "scenario,controller,run,mu_m,d_m_max,mu_c,d_c_max,t_R,excluded_frames\n");
  metrics::MetricsReport r;
  r.mu_m = 4.0;
  r.d_m_max = 6.0;
  r.t_R = 100.0;
  r.excluded_frames = 2;
  CHECK(io::report_csv_line({"S", "pid", 3, r}) == "S,pid,3,4,6,0,0,100,2\n");
  CHECK(io::report_csv_line({"UH", "drl", 0, std::nullopt}) == "UH,drl,0,,,,,,\n");

  metrics::MetricsReport b = r;
  b.mu_m = 8.0;
  const std::vector<metrics::MetricsReport> two{r, b}, one{r};
  const auto csv = io::aggregate_csv({{"S", "pid", metrics::aggregate(two), 2}, {"UL", "pid", metrics::aggregate(one), 1}});
  const auto first_nl = csv.find('\n');
  CHECK(csv.substr(0, first_nl) ==
        "scenario,controller,mu_m_mean,mu_m_std,d_m_max_mean,d_m_max_std,mu_c_mean,mu_c_std,d_c_max_mean,"
        "d_c_max_std,t_R_mean,t_R_std,runs,completed");
  CHECK(csv.find("S,pid,6,2.8284271247461903,6,0,0,0,0,0,100,0,2,2\n") != std::string::npos);
  CHECK(csv.find("UL,pid,4,,6,,0,,0,,100,,1,1\n") != std::string::npos);

  const auto curve = io::curve_csv({{1, 16384, 0.5, 0.25, -0.01, 0.3, 1.9, 0.125}});
  CHECK(curve ==
        "update,step,mean_reward,mean_inside_frac,policy_loss,value_loss,entropy,clip_frac\n"
        "1,16384,0.5,0.25,-0.01,0.3,1.9,0.125\n");
}

TEST_CASE("svg overlay") {
  const auto svg = io::overlay_svg(40, 30, {{1, 1}, {5, 1}, {5, 5}}, {{0, 0}, {10, 10}}, {{3, 3}}, "a<b");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
