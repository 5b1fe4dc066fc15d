#include "plume/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace plume::rl {

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must lie in (0, 1]");
  if (!(clip_eps > 0.0)) throw ConfigError("ppo: clip_eps must be positive");
  if (batch <= 0 || horizon <= 0 || n_envs <= 0 || epochs <= 0) throw ConfigError("ppo: sizes must be positive");
  if (steps_per_update() % batch != 0) throw ConfigError("ppo: batch must divide horizon * n_envs");
  if (!(lr > 0.0)) throw ConfigError("ppo: lr must be positive");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("ppo: gae_lambda must lie in [0, 1]");
  if (checkpoint_every <= 0) throw ConfigError("ppo: checkpoint_every must be positive");
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw ShapeError("compute_gae: series lengths differ");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    r.advantages[k] = next_adv;
    r.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return r;
}

void compute_advantages(RolloutBuffer& buffer, double gamma, double lambda) {
  buffer.advantages.assign(buffer.size(), 0.0f);
  buffer.returns.assign(buffer.size(), 0.0f);
  std::vector<double> rew(buffer.horizon), val(buffer.horizon);
  std::vector<std::uint8_t> done(buffer.horizon);
  for (int e = 0; e < buffer.n_envs; ++e) {
    for (int t = 0; t < buffer.horizon; ++t) {
      const Transition& tr = buffer.at(t, e);
      rew[t] = tr.reward;
      val[t] = tr.value;
      done[t] = tr.done;
    }
    const auto g = compute_gae(rew, val, done, buffer.bootstrap_values[e], gamma, lambda);
    for (int t = 0; t < buffer.horizon; ++t) {
      const std::size_t i = static_cast<std::size_t>(t) * buffer.n_envs + e;
      buffer.advantages[i] = static_cast<float>(g.advantages[t]);
      buffer.returns[i] = static_cast<float>(g.returns[t]);
    }
  }
}

void normalize_advantages(std::vector<float>& adv) {
  if (adv.empty()) return;
  double mean = 0.0;
  for (float a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (float a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (float& a : adv) a = static_cast<float>((a - mean) * inv);
}

SurrogateTerm clipped_surrogate(std::span<const double> logits, int action, double old_log_prob,
                                double advantage, double clip_eps) {
  const auto terms = nn::softmax_logprob_entropy<double>(logits);
  SurrogateTerm s;
  s.ratio = std::exp(terms.log_probs[static_cast<std::size_t>(action)] - old_log_prob);
  const double unclipped = s.ratio * advantage;
  const double clipped = std::clamp(s.ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
  s.clipped = clipped < unclipped;
  s.objective = s.clipped ? clipped : unclipped;
  s.dobjective_dlogits.assign(logits.size(), 0.0);
  if (!s.clipped) {
    // d(rho*A)/dz = rho*A * dlogp/dz, with dlogp/dz_j = [j == a] - p_j.
    for (std::size_t j = 0; j < logits.size(); ++j)
      s.dobjective_dlogits[j] = unclipped * ((static_cast<int>(j) == action ? 1.0 : 0.0) - terms.probs[j]);
  }
  return s;
}

nn::Tensor<float> make_batch(const nn::NetworkSpec& spec, std::span<const std::uint8_t* const> masks) {
  const std::size_t px = static_cast<std::size_t>(spec.height) * spec.width * spec.in_channels;
  nn::Tensor<float> t({static_cast<int>(masks.size()), spec.height, spec.width, spec.in_channels});
  for (std::size_t b = 0; b < masks.size(); ++b) {
    float* dst = t.ptr() + b * px;
    const std::uint8_t* src = masks[b];
    for (std::size_t i = 0; i < px; ++i) dst[i] = src[i] ? 1.0f : 0.0f;
  }
  return t;
}

nn::Tensor<float> make_batch(const nn::NetworkSpec& spec, const sensor::SegMask& mask) {
  if (mask.width() != spec.width || mask.height() != spec.height || spec.in_channels != 1)
    throw ShapeError("mask " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                     " does not match the network input");
  const std::uint8_t* p = mask.bits().data();
  return make_batch(spec, std::span<const std::uint8_t* const>(&p, 1));
}

namespace {

struct MinibatchResult {
  double objective = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double ratio_sum = 0.0;
  double max_ratio_error = 0.0;
  double kl_sum = 0.0;
  int clipped = 0;
  std::vector<float> dlogits;
  std::vector<float> dvalues;
};

MinibatchResult minibatch_terms(const RolloutBuffer& buf, std::span<const std::size_t> idx,
                                const nn::ForwardResult<float>& fwd, const PpoConfig& cfg, int actions) {
  MinibatchResult r;
  const std::size_t B = idx.size();
  r.dlogits.assign(B * actions, 0.0f);
  r.dvalues.assign(B, 0.0f);
  const double inv_b = 1.0 / static_cast<double>(B);
  std::vector<double> z(actions);
  for (std::size_t b = 0; b < B; ++b) {
    const Transition& tr = buf.transitions[idx[b]];
    for (int j = 0; j < actions; ++j) z[j] = fwd.logits[b * actions + j];
    const double adv = buf.advantages[idx[b]];
    const auto s = clipped_surrogate(z, tr.action, tr.log_prob, adv, cfg.clip_eps);
    const auto terms = nn::softmax_logprob_entropy<double>(z);
    const double v = fwd.values[b];
    const double ret = buf.returns[idx[b]];

    r.objective += s.objective;
    r.value_loss += (v - ret) * (v - ret);
    r.entropy += terms.entropy;
    r.ratio_sum += s.ratio;
    r.max_ratio_error = std::max(r.max_ratio_error, std::abs(s.ratio - 1.0));
    r.kl_sum += tr.log_prob - terms.log_probs[static_cast<std::size_t>(tr.action)];
    if (std::abs(s.ratio - 1.0) > cfg.clip_eps) ++r.clipped;

    // loss = -objective + value_coef * (v - ret)^2 - entropy_coef * H, averaged over the batch.
    for (int j = 0; j < actions; ++j) {
      const double dh = -terms.probs[j] * (terms.log_probs[j] + terms.entropy);
      r.dlogits[b * actions + j] =
          static_cast<float>(inv_b * (-s.dobjective_dlogits[j] - cfg.entropy_coef * dh));
    }
    r.dvalues[b] = static_cast<float>(inv_b * cfg.value_coef * 2.0 * (v - ret));
  }
  return r;
}

double buffer_surrogate(const RolloutBuffer& buf, const nn::NetworkSpec& spec, const nn::Parameters<float>& params,
                        const PpoConfig& cfg) {
  double total = 0.0;
  const std::size_t n = buf.size();
  std::vector<const std::uint8_t*> ptrs;
  std::vector<double> z(spec.actions);
  for (std::size_t start = 0; start < n; start += cfg.batch) {
    const std::size_t end = std::min(n, start + cfg.batch);
    ptrs.clear();
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(buf.transitions[i].obs.data());
    const auto fwd = nn::forward<float>(spec, params, make_batch(spec, ptrs));
    for (std::size_t i = start; i < end; ++i) {
      for (int j = 0; j < spec.actions; ++j) z[j] = fwd.logits[(i - start) * spec.actions + j];
      const Transition& tr = buf.transitions[i];
      total += clipped_surrogate(z, tr.action, tr.log_prob, buf.advantages[i], cfg.clip_eps).objective;
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace

UpdateStats ppo_update(RolloutBuffer& buffer, const nn::NetworkSpec& spec, nn::Parameters<float>& params,
                       nn::AdamState<float>& opt, const PpoConfig& cfg, Rng& rng, bool track_surrogate) {
  if (buffer.advantages.size() != buffer.size() || buffer.returns.size() != buffer.size())
    throw ShapeError("ppo_update: advantages not computed");
  if (buffer.size() == 0 || buffer.size() % static_cast<std::size_t>(cfg.batch) != 0)
    throw ShapeError("ppo_update: buffer size must be a positive multiple of the batch size");
  normalize_advantages(buffer.advantages);
  opt.lr = cfg.lr;

  UpdateStats stats;
  const std::size_t n = buffer.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const std::uint8_t*> ptrs;
  double samples = 0.0;
  int mb_index = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (track_surrogate) stats.epoch_surrogate.push_back(buffer_surrogate(buffer, spec, params, cfg));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch, ++mb_index) {
      const std::span<const std::size_t> idx(order.data() + start, static_cast<std::size_t>(cfg.batch));
      ptrs.clear();
      for (std::size_t i : idx) ptrs.push_back(buffer.transitions[i].obs.data());
      const auto fwd = nn::forward<float>(spec, params, make_batch(spec, ptrs));
      const auto mb = minibatch_terms(buffer, idx, fwd, cfg, spec.actions);

      const double B = static_cast<double>(idx.size());
      const double loss = -mb.objective / B + cfg.value_coef * mb.value_loss / B - cfg.entropy_coef * mb.entropy / B;
      if (!std::isfinite(loss))
        throw TrainingAbort("non-finite PPO loss in minibatch " + std::to_string(mb_index), mb_index);

      if (mb_index == 0) stats.first_batch_max_ratio_error = mb.max_ratio_error;
      stats.policy_loss += -mb.objective;
      stats.value_loss += mb.value_loss;
      stats.entropy += mb.entropy;
      stats.mean_ratio += mb.ratio_sum;
      stats.approx_kl += mb.kl_sum;
      stats.clip_frac += mb.clipped;
      samples += B;

      auto grads = nn::backward<float>(spec, params, fwd.cache, mb.dlogits, mb.dvalues);
      nn::clip_grad_norm(grads, cfg.max_grad_norm);
      nn::adam_update(params, grads, opt);
    }
  }
  stats.minibatches = mb_index;
  stats.policy_loss /= samples;
  stats.value_loss /= samples;
  stats.entropy /= samples;
  stats.mean_ratio /= samples;
  stats.approx_kl /= samples;
  stats.clip_frac /= samples;
  return stats;
}

namespace {

int sample_action(std::span<const float> logits, Rng& rng, float* log_prob) {
  std::vector<double> z(logits.begin(), logits.end());
  const auto t = nn::softmax_logprob_entropy<double>(z);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  int a = static_cast<int>(t.probs.size()) - 1;
  for (std::size_t j = 0; j < t.probs.size(); ++j) {
    acc += t.probs[j];
    if (x < acc) {
      a = static_cast<int>(j);
      break;
    }
  }
  if (log_prob) *log_prob = static_cast<float>(t.log_probs[static_cast<std::size_t>(a)]);
  return a;
}

}  // namespace

RolloutBuffer collect_rollouts(std::span<const std::unique_ptr<Environment>> envs, const nn::NetworkSpec& spec,
                               const nn::Parameters<float>& params, int horizon, std::span<Rng> rngs,
                               CollectStats* stats) {
  constexpr int kMaxFaultRetries = 16;
  const int n = static_cast<int>(envs.size());
  if (rngs.size() != envs.size()) throw ShapeError("collect_rollouts: one generator per environment required");
  RolloutBuffer buf;
  buf.horizon = horizon;
  buf.n_envs = n;
  buf.transitions.resize(static_cast<std::size_t>(horizon) * n);
  buf.bootstrap_values.assign(n, 0.0f);

  CollectStats st;
  double reward_sum = 0.0;
  long inside = 0;
  std::vector<const std::uint8_t*> ptrs(n);

  for (int t = 0; t < horizon; ++t) {
    for (int e = 0; e < n; ++e) ptrs[e] = envs[e]->observation().bits().data();
    const auto fwd = nn::forward<float>(spec, params, make_batch(spec, ptrs));
    for (int e = 0; e < n; ++e) {
      Transition& tr = buf.at(t, e);
      const auto row = fwd.logits.begin() + static_cast<std::ptrdiff_t>(e) * spec.actions;
      std::vector<float> logits(row, row + spec.actions);
      float value = fwd.values[e];
      for (int attempt = 0;; ++attempt) {
        const auto bits = envs[e]->observation().bits();
        tr.obs.assign(bits.begin(), bits.end());
        tr.action = sample_action(logits, rngs[e], &tr.log_prob);
        tr.value = value;
        try {
          const StepOutcome out = envs[e]->step(tr.action);
          tr.reward = static_cast<float>(out.reward);
          tr.done = out.done;
          tr.inside = out.inside;
          break;
        } catch (const std::exception&) {
          ++st.faults;
          if (attempt >= kMaxFaultRetries) throw;
          envs[e]->reset();
          const auto single = nn::forward<float>(spec, params, make_batch(spec, envs[e]->observation()));
          logits = single.logits;
          value = single.values[0];
        }
      }
      reward_sum += tr.reward;
      inside += tr.inside;
      if (tr.done) {
        ++st.episodes;
        envs[e]->reset();
      }
    }
  }
  for (int e = 0; e < n; ++e) ptrs[e] = envs[e]->observation().bits().data();
  const auto last = nn::forward<float>(spec, params, make_batch(spec, ptrs));
  for (int e = 0; e < n; ++e) buf.bootstrap_values[e] = last.values[e];

  const double total = static_cast<double>(buf.size());
  st.mean_reward = reward_sum / total;
  st.inside_frac = static_cast<double>(inside) / total;
  if (stats) *stats = st;
  return buf;
}

int infer(const nn::NetworkSpec& spec, const nn::Parameters<float>& params, const sensor::SegMask& mask,
          InferMode mode, Rng* rng) {
  const auto fwd = nn::forward<float>(spec, params, make_batch(spec, mask));
  if (mode == InferMode::sample && rng) return sample_action(fwd.logits, *rng, nullptr);
  return nn::argmax<float>(fwd.logits);
}

TrainState train(const nn::NetworkSpec& spec, const PpoConfig& cfg, const EnvFactory& make_env,
                 const TrainHooks& hooks, const TrainState* resume) {
  spec.validate();
  cfg.validate();
  TrainState state;
  if (resume) {
    state = *resume;
    if (state.params.count() != spec.param_count()) throw ArtifactError("resume state does not match network");
  } else {
    Rng init_rng = make_rng(cfg.seed, "init");
    state.params = nn::init_parameters<float>(spec, init_rng);
    state.opt = nn::AdamState<float>::zeros_like(state.params, cfg.lr);
  }
  if (state.steps_done >= cfg.total_steps) {
    if (hooks.on_checkpoint) hooks.on_checkpoint(state);
    return state;
  }

  const std::string epoch_tag = "/" + std::to_string(state.update);
  std::vector<std::unique_ptr<Environment>> envs;
  std::vector<Rng> rngs;
  for (int i = 0; i < cfg.n_envs; ++i) {
    const std::string tag = std::to_string(i) + epoch_tag;
    envs.push_back(make_env(i, derive_seed(cfg.seed, "env/" + tag)));
    rngs.emplace_back(derive_seed(cfg.seed, "policy/" + tag));
  }
  Rng update_rng = make_rng(cfg.seed, "update" + epoch_tag);

  bool checkpointed_last = false;
  while (state.steps_done < cfg.total_steps) {
    CollectStats cs;
    RolloutBuffer buf = collect_rollouts(envs, spec, state.params, cfg.horizon, rngs, &cs);
    compute_advantages(buf, cfg.gamma, cfg.gae_lambda);
    const UpdateStats us = ppo_update(buf, spec, state.params, state.opt, cfg, update_rng);
    if (!state.params.all_finite())
      throw TrainingAbort("non-finite parameters after update " + std::to_string(state.update + 1), -1);
    ++state.update;
    state.steps_done += cfg.steps_per_update();
    state.curve.push_back(CurveRecord{state.update, state.steps_done, cs.mean_reward, cs.inside_frac,
                                      us.policy_loss, us.value_loss, us.entropy, us.clip_frac});
    checkpointed_last = false;
    if (hooks.on_checkpoint && state.update % cfg.checkpoint_every == 0) {
      hooks.on_checkpoint(state);
      checkpointed_last = true;
    }
    if (hooks.on_update && !hooks.on_update(state)) break;
  }
  if (hooks.on_checkpoint && !checkpointed_last) hooks.on_checkpoint(state);
  return state;
}

}  // namespace plume::rl
