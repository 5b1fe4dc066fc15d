// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails. Criteria can be selected by number:
//   plume_acceptance 1 3 5
#include "plume/config.hpp"
#include "plume/eval.hpp"
#include "plume/io.hpp"
#include "plume/geo.hpp"
#include "plume/geometry.hpp"
#include "plume/metrics.hpp"
#include "plume/nn/layers.hpp"
#include "plume/nn/network.hpp"
#include "plume/rl/env.hpp"
#include "plume/rl/ppo.hpp"
#include "plume/snapshot.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace plume;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... v) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

std::vector<double> randoms(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Worst relative error between an analytic gradient and central differences.
double grad_error(std::vector<double>& x, const std::vector<double>& analytic, const std::function<double()>& f) {
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f();
    x[i] = keep - h;
    const double fm = f();
    x[i] = keep;
    worst = std::max(worst, rel_err(analytic[i], (fp - fm) / (2 * h)));
  }
  return worst;
}

// ---- 1 ---------------------------------------------------------------------

Outcome wind_exactness() {
  struct Expected {
    sim::ScenarioKind kind;
    double ax, wx, az, wz;
  };
  const double pi = std::acos(-1.0);
  const Expected table[] = {{sim::ScenarioKind::S, 0, 0, 0, 0},
                            {sim::ScenarioKind::UL, 1.35, 0.02 * pi, 0, 0},
                            {sim::ScenarioKind::UH, 1.95, 0.04 * pi, 0, 0},
                            {sim::ScenarioKind::U3D, 1.95, 0.04 * pi, 0.3, 0.02 * pi}};
  double worst = 0.0;
  long samples = 0;
  for (const auto& e : table) {
    const auto s = sim::WindScenario::preset(e.kind);
    for (long k = 0; k <= 600000; ++k) {
      const double t = k * 1e-3;
      const Vec3 w = sim::wind_at(s, t);
      worst = std::max({worst, std::abs(w.x() - e.ax * std::sin(e.wx * t)), std::abs(w.y() - 4.5),
                        std::abs(w.z() - e.az * std::sin(e.wz * t))});
      ++samples;
    }
  }
  return {worst <= 1e-12, fmt("max abs error %.3g over %ld samples", worst, samples)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome gradients() {
  std::mt19937_64 rng(11);
  std::map<std::string, double> worst;

  {
    const int B = 3, I = 6, O = 5;
    auto w = randoms(O * I, rng), b = randoms(O, rng), x = randoms(B * I, rng), c = randoms(B * O, rng);
    auto loss = [&] {
      std::vector<double> y(B * O);
      nn::dense_forward<double>(B, I, O, w, b, x, y);
      return dot(y, c);
    };
    std::vector<double> dw(w.size()), db(b.size()), dx(x.size());
    nn::dense_backward<double>(B, I, O, w, x, c, dw, db, dx);
    worst["dense"] = std::max({grad_error(w, dw, loss), grad_error(b, db, loss), grad_error(x, dx, loss)});
  }
  {
    const nn::ConvGeometry g{2, 7, 7, 2, 3, 3, 2};
    auto w = randoms(static_cast<std::size_t>(g.out_c) * g.patch(), rng), b = randoms(g.out_c, rng);
    auto x = randoms(static_cast<std::size_t>(g.batch) * g.in_h * g.in_w * g.in_c, rng);
    const std::size_t n_out = static_cast<std::size_t>(g.columns()) * g.out_c;
    const auto c = randoms(n_out, rng);
    std::vector<double> cols(static_cast<std::size_t>(g.patch()) * g.columns());
    auto loss = [&] {
      std::vector<double> k(cols.size()), y(n_out);
      nn::im2col<double>(g, x, k);
      nn::conv_forward<double>(g, w, b, k, y);
      return dot(y, c);
    };
    nn::im2col<double>(g, x, cols);
    std::vector<double> dw(w.size()), db(b.size()), dcols(cols.size()), dx(x.size());
    nn::conv_backward<double>(g, w, cols, c, dw, db, dcols);
    nn::col2im<double>(g, dcols, dx);
    worst["conv"] = std::max({grad_error(w, dw, loss), grad_error(b, db, loss), grad_error(x, dx, loss)});
  }
  {
    auto x = randoms(40, rng);
    const auto c = randoms(40, rng);
    auto loss = [&] {
      auto y = x;
      nn::relu_forward<double>(y);
      return dot(y, c);
    };
    auto y = x;
    nn::relu_forward<double>(y);
    auto g = c;
    nn::relu_backward<double>(y, g);
    worst["relu"] = grad_error(x, g, loss);
  }
  {
    // Policy head: clipped surrogate inside the trust band, plus entropy.
    auto logits = randoms(7, rng);
    const int action = 4;
    const double old_lp = nn::softmax_logprob_entropy<double>(logits).log_probs[action] - std::log(1.05);
    auto surrogate = [&] { return rl::clipped_surrogate(logits, action, old_lp, 0.7, 0.2).objective; };
    worst["surrogate"] =
        grad_error(logits, rl::clipped_surrogate(logits, action, old_lp, 0.7, 0.2).dobjective_dlogits, surrogate);
  }
  nn::NetworkSpec spec;
  spec.height = 9;
  spec.width = 9;
  spec.convs = {{2, 3, 2}, {4, 2, 1}};
  spec.trunk = 6;
  {
    Rng init(3);
    const auto params = nn::init_parameters<double>(spec, init, 1.0);
    const int B = 2;
    const nn::Tensor<double> x({B, spec.height, spec.width, 1}, randoms(static_cast<std::size_t>(B) * 81, rng));
    const auto cl = randoms(static_cast<std::size_t>(B) * spec.actions, rng), cv = randoms(B, rng);
    auto flat = params.flatten();
    auto loss = [&] {
      auto p = params;
      p.assign(flat);
      const auto f = nn::forward(spec, p, x);
      return dot(f.logits, cl) + dot(f.values, cv);
    };
    const auto f = nn::forward(spec, params, x);
    const auto g = nn::backward<double>(spec, params, f.cache, cl, cv);
    worst["network"] = grad_error(flat, g.flatten(), loss);
  }
  double all = 0.0;
  std::string detail;
  for (const auto& [name, e] : worst) {
    all = std::max(all, e);
    detail += fmt("%s %.2g, ", name.c_str(), e);
  }
  detail += fmt("network params %zu", spec.param_count());
  return {all <= 1e-4 && spec.param_count() <= 500, detail};
}

// ---- 3 ---------------------------------------------------------------------

Outcome ppo_mechanics() {
  const auto cfg = config::default_config("desk");
  const auto& spec = cfg.network;
  Rng init(5);
  auto params = nn::init_parameters<float>(spec, init);

  std::vector<std::unique_ptr<rl::Environment>> envs;
  std::vector<Rng> rngs;
  for (int i = 0; i < 4; ++i) {
    envs.push_back(std::make_unique<rl::ToyRegionEnv>(rl::ToyEnvConfig{}, 100 + i));
    rngs.emplace_back(200 + i);
  }
  auto buf = rl::collect_rollouts(envs, spec, params, 64, rngs);

  // Ratios against a fresh batched forward pass with the same parameters.
  std::vector<const std::uint8_t*> ptrs;
  for (const auto& t : buf.transitions) ptrs.push_back(t.obs.data());
  const auto f = nn::forward(spec, params, rl::make_batch(spec, ptrs));
  double ratio_err = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const std::span<const float> row(f.logits.data() + i * spec.actions, spec.actions);
    const auto pol = nn::softmax_logprob_entropy<float>(row);
    const double ratio = std::exp(double(pol.log_probs[buf.transitions[i].action]) - buf.transitions[i].log_prob);
    ratio_err = std::max(ratio_err, std::abs(ratio - 1.0));
  }

  rl::compute_advantages(buf, cfg.ppo.gamma, cfg.ppo.gae_lambda);
  auto norm = buf.advantages;
  rl::normalize_advantages(norm);
  double mean = 0.0, var = 0.0;
  for (float a : norm) mean += a;
  mean /= norm.size();
  for (float a : norm) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / norm.size());

  rl::PpoConfig pc = cfg.ppo;
  pc.batch = 64;
  pc.epochs = 1;
  auto opt = nn::AdamState<float>::zeros_like(params, pc.lr);
  Rng urng(6);
  const auto stats = rl::ppo_update(buf, spec, params, opt, pc, urng);

  std::mt19937_64 rng(8);
  double clipped_grad = 0.0;
  int clipped_cases = 0;
  for (int k = 0; k < 200; ++k) {
    const auto logits = randoms(7, rng);
    const auto pol = nn::softmax_logprob_entropy<double>(logits);
    const int a = k % 7;
    const bool high = k % 2 == 0;
    const double rho = high ? 1.2 + 0.01 + 0.5 * (k % 10) / 10.0 : 0.8 - 0.01 - 0.5 * (k % 10) / 10.0;
    const double adv = high ? 0.1 + k * 0.01 : -0.1 - k * 0.01;
    const auto s = rl::clipped_surrogate(logits, a, pol.log_probs[a] - std::log(rho), adv, 0.2);
    clipped_cases += s.clipped;
    for (double g : s.dobjective_dlogits) clipped_grad = std::max(clipped_grad, std::abs(g));
  }

  const bool pass = ratio_err <= 1e-6 && stats.first_batch_max_ratio_error <= 1e-6 && clipped_grad == 0.0 &&
                    clipped_cases == 200 && std::abs(mean) <= 1e-6 && std::abs(sd - 1.0) <= 1e-6;
  return {pass, fmt("ratio err %.2g (first minibatch %.2g), clipped grad %g over %d cases, adv mean %.2g std-1 %.2g",
                    ratio_err, stats.first_batch_max_ratio_error, clipped_grad, clipped_cases, mean, sd - 1.0)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome toy_learnability() {
  const auto cfg = config::default_config("desk");
  rl::PpoConfig pc = cfg.ppo;
  pc.total_steps = (50'000 / pc.steps_per_update()) * pc.steps_per_update();
  rl::ToyEnvConfig toy;
  toy.width = cfg.network.width;
  toy.height = cfg.network.height;
  toy.partition = cfg.partition;
  toy.rewards = cfg.rewards;
  const rl::EnvFactory make = [toy](int, std::uint64_t seed) -> std::unique_ptr<rl::Environment> {
    return std::make_unique<rl::ToyRegionEnv>(toy, seed);
  };
  const auto state = rl::train(cfg.network, pc, make);

  Rng rng(424242);
  const int trials = 2000;
  int correct = 0;
  for (int i = 0; i < trials; ++i) {
    const auto mask = rl::ToyRegionEnv::draw(toy, rng);
    const int want = rl::region_of(*mask.centroid(), toy.partition, toy.width, toy.height);
    correct += rl::infer(cfg.network, state.params, mask) == want;
  }
  const double acc = 100.0 * correct / trials;
  return {acc >= 95.0 && state.steps_done <= 50'000,
          fmt("accuracy %.2f%% on %d held-out masks after %ld steps", acc, trials, state.steps_done)};
}

// ---- 5 ---------------------------------------------------------------------

double dense_min(const Vec2& p, const std::vector<Vec2>& pts, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = closed ? pts.size() : pts.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = pts[i], b = pts[(i + 1) % pts.size()];
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a).norm() / 1e-3)));
    for (int k = 0; k <= steps; ++k) best = std::min(best, (a + (b - a) * (double(k) / steps) - p).norm());
  }
  return best;
}

bool winding_inside(const Vec2& p, const std::vector<Vec2>& poly) {
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i] - p, b = poly[(i + 1) % poly.size()] - p;
    total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return std::abs(total) > 3.14159;
}

Outcome metric_oracles() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 30.0), rad(4.0, 12.0);
  std::uniform_int_distribution<int> nv(2, 7);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<Vec2> line;
    const int n = nv(rng);
    for (int i = 0; i < n; ++i) line.emplace_back(u(rng), u(rng));
    const Vec2 p{u(rng), u(rng)};
    worst = std::max(worst, std::abs(geom::dist_to_polyline(p, line) - dense_min(p, line, false)));

    std::vector<Vec2> poly;
    const int m = nv(rng) + 3;
    for (int i = 0; i < m; ++i) {
      const double a = 2.0 * kPi * i / m, r = rad(rng);
      poly.emplace_back(15.0 + r * std::cos(a), 15.0 + r * std::sin(a));
    }
    const Vec2 q{u(rng), u(rng)};
    const double expected = winding_inside(q, poly) ? 0.0 : dense_min(q, poly, true);
    worst = std::max(worst, std::abs(geom::dist_outside_polygon(q, poly) - expected));
  }
  const std::vector<metrics::SampleDistances> hand{{2, 0, true}, {4, 0, true}, {6, 0, true}};
  const auto r = metrics::summarize(hand, 100.0);
  const bool hand_ok = r.mu_m == 4.0 && r.d_m_max == 6.0 && r.t_R == 100.0;
  const double hv = geo::haversine({0.0, 0.0}, {0.0, 1.0});
  return {worst <= 1e-3 && hand_ok && std::abs(hv - 111195.0) <= 1.0,
          fmt("dense-sampling gap %.2g px, hand case %g/%g/%g, equator degree %.3f m", worst, r.mu_m, r.d_m_max,
              r.t_R, hv)};
}

// ---- 6 ---------------------------------------------------------------------

Outcome mission_protocol() {
  using mission::Phase;
  const auto cfg = config::default_config("desk");
  const std::vector<Phase> want{Phase::Detecting, Phase::FlowEstimating, Phase::YawAligning, Phase::Descending,
                                Phase::InPlume};
  const long window = std::lround(10.0 / cfg.physics.dt);
  int complete = 0;
  bool rates = true;
  long windows = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto log = eval::run_mission(cfg, sim::ScenarioKind::S, mission::ControllerKind::pid, seed,
                                       cfg.eval_duration);
    std::size_t k = 0;
    for (const auto& rec : log.records)
      if (k < want.size() && rec.phase == want[k]) ++k;
    complete += k == want.size();

    // Every 10 s window, via prefix sums.
    const std::size_t n = log.records.size();
    std::vector<long> s(n + 1), d(n + 1), c(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      s[i + 1] = s[i] + log.records[i].sensed;
      d[i + 1] = d[i] + log.records[i].decided;
      c[i + 1] = c[i] + log.records[i].dispatched;
    }
    for (std::size_t i = 0; i + window <= n; ++i, ++windows)
      rates = rates && s[i + window] - s[i] == 300 && d[i + window] - d[i] == 100 && c[i + window] - c[i] == 200;
  }
  return {complete == 5 && rates && windows > 0,
          fmt("%d/5 episodes reach InPlume via the full chain; %ld windows at 300/100/200: %s", complete, windows,
              rates ? "all" : "NOT all")};
}

// ---- 7 ---------------------------------------------------------------------

Outcome table_ordering() {
  const auto cfg = config::default_config("desk");
  auto t0 = std::chrono::steady_clock::now();
  const auto env_cfg = config::train_env_config(cfg);
  const rl::EnvFactory make = [env_cfg](int, std::uint64_t seed) -> std::unique_ptr<rl::Environment> {
    return std::make_unique<rl::PlumeEnv>(env_cfg, seed);
  };
  rl::TrainHooks hooks;
  hooks.on_update = [](const rl::TrainState& s) {
    const auto& c = s.curve.back();
    std::cerr << "  training update " << c.update << " step " << c.step << " reward " << c.mean_reward << std::endl;
    return true;
  };
  const auto state = rl::train(cfg.network, cfg.ppo, make, hooks);
  const rl::PolicySnapshot policy{cfg.network, cfg.actions, cfg.partition, state.params};
  const double train_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::map<std::pair<sim::ScenarioKind, mission::ControllerKind>, std::vector<metrics::MetricsReport>> cells;
  for (auto kind : {sim::ScenarioKind::S, sim::ScenarioKind::UH, sim::ScenarioKind::U3D})
    for (auto ctl : {mission::ControllerKind::pid, mission::ControllerKind::drl}) {
      const auto run_cfg = eval::with_controller(cfg, ctl);
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto log = eval::run_mission(cfg, kind, ctl, seed, cfg.eval_duration, &policy);
        const auto scored = eval::score_episode(log, run_cfg);
        // Runs that never reach the plume are left out, as in the evaluation table.
        if (scored.report) cells[{kind, ctl}].push_back(*scored.report);
      }
    }
  const double eval_s = seconds_since(t0);

  auto mean = [&](sim::ScenarioKind k, mission::ControllerKind c) { return metrics::aggregate(cells[{k, c}]); };
  using K = sim::ScenarioKind;
  const auto pid = mission::ControllerKind::pid, drl = mission::ControllerKind::drl;
  const double s_pid = mean(K::S, pid).stats[4].mean;
  const double u3_pid = mean(K::U3D, pid).stats[4].mean, u3_drl = mean(K::U3D, drl).stats[4].mean;
  const double u3_pid_m = mean(K::U3D, pid).stats[0].mean, u3_drl_m = mean(K::U3D, drl).stats[0].mean;
  const double uh_pid = mean(K::UH, pid).stats[4].mean, uh_drl = mean(K::UH, drl).stats[4].mean;
  const bool a = s_pid >= 90.0;
  const bool b = u3_drl - u3_pid >= 5.0 && u3_drl_m < u3_pid_m;
  const bool c = uh_drl > uh_pid;
  const bool time_ok = train_s <= 4 * 3600.0 && eval_s <= 20 * 60.0;
  return {a && b && c && time_ok,
          fmt("(a) S PID t_R %.1f; (b) U3D t_R DRL %.1f vs PID %.1f, mu_m %.2f vs %.2f; (c) UH t_R DRL %.1f vs PID "
              "%.1f; train %.0f s, eval %.0f s",
              s_pid, u3_drl, u3_pid, u3_drl_m, u3_pid_m, uh_drl, uh_pid, train_s, eval_s)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome determinism() {
  const auto cfg = config::default_config("desk");
  Rng init(77);
  const rl::PolicySnapshot policy{cfg.network, cfg.actions, cfg.partition,
                                  nn::init_parameters<float>(cfg.network, init)};

  bool logs_equal = true, csv_equal = true, replay_exact = true;
  int scored = 0;
  std::vector<io::ReportRow> rows_a, rows_b;
  const std::pair<sim::ScenarioKind, mission::ControllerKind> runs[] = {
      {sim::ScenarioKind::S, mission::ControllerKind::pid},
      {sim::ScenarioKind::UH, mission::ControllerKind::pid},
      {sim::ScenarioKind::U3D, mission::ControllerKind::drl}};
  for (const auto& [kind, ctl] : runs) {
    const auto run_cfg = eval::with_controller(cfg, ctl);
    std::string text[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto log = eval::run_mission(cfg, kind, ctl, 11, 60.0, &policy);
      const auto s = eval::score_episode(log, run_cfg);
      text[rep] = io::encode_log(log, run_cfg, io::LogSummary{s.report.has_value(), s.report});
      (rep == 0 ? rows_a : rows_b)
          .push_back({std::string(sim::to_string(kind)), std::string(mission::to_string(ctl)), 0, s.report});
    }
    logs_equal = logs_equal && text[0] == text[1];

    const auto loaded = io::decode_log(text[0]);
    const auto again = eval::score_episode(loaded.log, loaded.config);
    replay_exact = replay_exact && loaded.summary && again.report == loaded.summary->metrics &&
                   io::encode_log(loaded.log, loaded.config, loaded.summary) == text[0];
    scored += again.report.has_value();
  }
  csv_equal = io::report_csv(rows_a) == io::report_csv(rows_b);

  const auto path = std::filesystem::temp_directory_path() / "plume_acceptance_policy.plmp";
  io::save_snapshot(path, policy, config::config_hash(cfg));
  const auto bytes = io::read_file(path);
  const auto loaded = io::load_snapshot(path);
  sensor::SegMask m(cfg.network.width, cfg.network.height);
  for (int i = 0; i < 200; ++i) m.set((i * 37) % m.width(), (i * 11) % m.height());
  m.refresh();
  const auto fa = nn::forward(policy.spec, policy.params, rl::make_batch(policy.spec, m));
  const auto fb = nn::forward(loaded.spec, loaded.params, rl::make_batch(loaded.spec, m));
  const bool snapshot_ok = loaded.params.tensors == policy.params.tensors && fa.logits == fb.logits &&
                           fa.values == fb.values && io::encode_snapshot(loaded, config::config_hash(cfg)) == bytes;
  std::filesystem::remove(path);

  return {logs_equal && csv_equal && replay_exact && snapshot_ok && scored > 0,
          fmt("logs %s, csv %s, snapshot %s, replay %s (%d scored)", logs_equal ? "identical" : "DIFFER",
              csv_equal ? "identical" : "DIFFER", snapshot_ok ? "bit-identical" : "DIFFERS",
              replay_exact ? "exact" : "MISMATCH", scored)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {1, "wind formula exactness", 1.0, wind_exactness},
      {2, "gradient correctness", 30.0, gradients},
      {3, "ppo mechanics", 10.0, ppo_mechanics},
      {4, "toy reward learnability", 20 * 60.0, toy_learnability},
      {5, "metric oracles", 10.0, metric_oracles},
      {6, "mission protocol", 120.0, mission_protocol},
      {7, "table ordering after desk training", 4 * 3600.0 + 20 * 60.0, table_ordering},
      {8, "determinism and persistence", 120.0, determinism},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = seconds_since(t0);
    const bool pass = o.pass && s <= c.budget_s;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << fmt(" (%.1f s)", s) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
