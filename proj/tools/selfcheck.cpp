#include "selfcheck.hpp"

#include "plume/geo.hpp"
#include "plume/geometry.hpp"
#include "plume/metrics.hpp"
#include "plume/nn/network.hpp"
#include "plume/rl/ppo.hpp"
#include "plume/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

namespace plume::cli {
namespace {

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

CheckItem wind_check() {
  double worst = 0.0;
  const double pi = kPi;
  for (auto kind : {sim::ScenarioKind::S, sim::ScenarioKind::UL, sim::ScenarioKind::UH, sim::ScenarioKind::U3D}) {
    const auto s = sim::WindScenario::preset(kind);
    for (int i = 0; i <= 6000; ++i) {
      const double t = 0.1 * i;
      double ex = 0.0, ez = 0.0;
      if (kind == sim::ScenarioKind::UL) ex = 1.35 * std::sin(0.02 * pi * t);
      if (kind == sim::ScenarioKind::UH || kind == sim::ScenarioKind::U3D) ex = 1.95 * std::sin(0.04 * pi * t);
      if (kind == sim::ScenarioKind::U3D) ez = 0.3 * std::sin(0.02 * pi * t);
      const Vec3 w = sim::wind_at(s, t);
      worst = std::max({worst, std::abs(w.x() - ex), std::abs(w.y() - 4.5), std::abs(w.z() - ez)});
    }
  }
  return {"wind closed forms", worst <= 1e-12, fmt("max abs error %.3g", worst)};
}

CheckItem network_gradient_check() {
  nn::NetworkSpec spec;
  spec.height = 8;
  spec.width = 8;
  spec.convs = {{2, 3, 2}, {3, 2, 1}};
  spec.trunk = 8;
  Rng rng(7);
  auto params = nn::init_parameters<double>(spec, rng, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int batch = 2;
  nn::Tensor<double> x({batch, spec.height, spec.width, 1});
  for (auto& v : x.data) v = u(rng);
  std::vector<double> cl(static_cast<std::size_t>(batch) * spec.actions), cv(batch);
  for (auto& v : cl) v = u(rng);
  for (auto& v : cv) v = u(rng);

  auto loss = [&](const nn::Parameters<double>& p) {
    const auto f = nn::forward(spec, p, x);
    double l = 0.0;
    for (std::size_t i = 0; i < cl.size(); ++i) l += cl[i] * f.logits[i];
    for (std::size_t i = 0; i < cv.size(); ++i) l += cv[i] * f.values[i];
    return l;
  };
  const auto f = nn::forward(spec, params, x);
  const auto g = nn::backward<double>(spec, params, f.cache, cl, cv);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    for (std::size_t i = 0; i < params.tensors[t].size(); ++i) {
      auto p = params;
      p.tensors[t].data[i] += h;
      const double lp = loss(p);
      p.tensors[t].data[i] -= 2 * h;
      const double lm = loss(p);
      worst = std::max(worst, rel_err(g.tensors[t].data[i], (lp - lm) / (2 * h)));
    }
  }
  return {"actor-critic gradients (" + std::to_string(spec.param_count()) + " params)", worst <= 1e-4,
          fmt("max relative error %.3g", worst)};
}

CheckItem ppo_ratio_check() {
  const std::vector<double> logits{0.3, -1.2, 0.8, 0.0, 0.5, -0.4, 1.1};
  const auto terms = nn::softmax_logprob_entropy<double>(logits);
  double worst = 0.0;
  for (int a = 0; a < 7; ++a) {
    const auto s = rl::clipped_surrogate(logits, a, terms.log_probs[a], 1.0, 0.2);
    worst = std::max(worst, std::abs(s.ratio - 1.0));
  }
  const auto hi = rl::clipped_surrogate(logits, 2, terms.log_probs[2] - std::log(1.5), 1.0, 0.2);
  double gmax = 0.0;
  for (double v : hi.dobjective_dlogits) gmax = std::max(gmax, std::abs(v));
  return {"ppo ratios and clipping", worst <= 1e-6 && gmax == 0.0,
          fmt("max |ratio-1| %.3g", worst) + fmt(", clipped grad %.3g", gmax)};
}

CheckItem gae_check() {
  const std::vector<double> r{1.0, 1.0}, v{0.0, 0.0};
  const std::vector<std::uint8_t> d{0, 1};
  const auto g = rl::compute_gae(r, v, d, 0.0, 0.99, 0.95);
  const double expect = 1.0 + 0.99 * 0.95;
  return {"gae two-step", std::abs(g.advantages[0] - expect) <= 1e-12, fmt("A0 = %.6f", g.advantages[0])};
}

CheckItem metric_hand_check() {
  std::vector<metrics::SampleDistances> s{{2.0, 0.0, true}, {4.0, 0.0, true}, {6.0, 0.0, true}};
  const auto r = metrics::summarize(s, 100.0);
  const bool ok = r.mu_m == 4.0 && r.d_m_max == 6.0 && r.t_R == 100.0;
  return {"metric hand case", ok, fmt("mu_m %.6g", r.mu_m) + fmt(" d_m_max %.6g", r.d_m_max) + fmt(" t_R %.6g", r.t_R)};
}

CheckItem polyline_oracle_check() {
  Rng rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    geom::Polyline line;
    for (int i = 0; i < 4; ++i) line.push_back({u(rng), u(rng)});
    const Vec2 p{u(rng), u(rng)};
    double brute = 1e300;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const Vec2 a = line[i], b = line[i + 1];
      const int n = static_cast<int>(std::ceil((b - a).norm() / 1e-3));
      for (int j = 0; j <= n; ++j) brute = std::min(brute, (a + (b - a) * (double(j) / n) - p).norm());
    }
    worst = std::max(worst, std::abs(brute - geom::dist_to_polyline(p, line)));
  }
  return {"polyline distance oracle", worst <= 1e-3, fmt("max abs error %.3g px", worst)};
}

CheckItem haversine_check() {
  const double d = geo::haversine({0.0, 0.0, 0.0}, {0.0, 1.0, 0.0});
  return {"haversine equator degree", std::abs(d - 111195.0) <= 1.0, fmt("%.3f m", d)};
}

}  // namespace

std::vector<CheckItem> run_self_checks() {
  std::vector<std::function<CheckItem()>> checks{wind_check,      network_gradient_check, ppo_ratio_check,
                                                 gae_check,       metric_hand_check,      polyline_oracle_check,
                                                 haversine_check};
  std::vector<CheckItem> out;
  for (const auto& c : checks) {
    try {
      out.push_back(c());
    } catch (const std::exception& e) {
      out.push_back({"(check threw)", false, e.what()});
    }
  }
  return out;
}

}  // namespace plume::cli
