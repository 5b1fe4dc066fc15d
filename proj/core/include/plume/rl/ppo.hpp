#pragma once

#include "plume/nn/adam.hpp"
#include "plume/nn/network.hpp"
#include "plume/rl/env.hpp"
#include "plume/sensor.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace plume::rl {

struct PpoConfig {
  double lr = 3e-4;
  double gamma = 0.99;
  int batch = 256;
  int horizon = 2048;  // steps per environment per update
  int epochs = 10;
  long total_steps = 1'000'000;
  double clip_eps = 0.2;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int n_envs = 8;
  std::uint64_t seed = 0;
  int checkpoint_every = 5;  // updates

  void validate() const;
  long steps_per_update() const { return static_cast<long>(horizon) * n_envs; }
};

struct Transition {
  std::vector<std::uint8_t> obs;  // mask bits at policy resolution
  int action = 0;
  float log_prob = 0.0f;
  float reward = 0.0f;
  float value = 0.0f;
  bool done = false;
  bool inside = false;
};

/// Transitions are stored time-major: index = t * n_envs + env.
struct RolloutBuffer {
  int horizon = 0;
  int n_envs = 0;
  std::vector<Transition> transitions;
  std::vector<float> bootstrap_values;  // value of the observation after the last step, per env
  std::vector<float> advantages;
  std::vector<float> returns;

  std::size_t size() const { return transitions.size(); }
  Transition& at(int t, int env) { return transitions[static_cast<std::size_t>(t) * n_envs + env]; }
  const Transition& at(int t, int env) const { return transitions[static_cast<std::size_t>(t) * n_envs + env]; }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalised advantage estimation over one environment's series. dones[t]
/// marks that the episode ended after step t (no bootstrap across it).
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda);

/// Fills buffer.advantages/returns per environment series.
void compute_advantages(RolloutBuffer& buffer, double gamma, double lambda);

/// Rescales advantages to zero mean and unit (population) variance in place.
void normalize_advantages(std::vector<float>& advantages);

/// Per-sample clipped-surrogate contribution and its gradient w.r.t. logits.
struct SurrogateTerm {
  double ratio = 1.0;
  double objective = 0.0;  // min(rho * A, clip(rho) * A)
  bool clipped = false;    // the clipped branch is active: no gradient through rho
  std::vector<double> dobjective_dlogits;
};

SurrogateTerm clipped_surrogate(std::span<const double> logits, int action, double old_log_prob,
                                double advantage, double clip_eps);

struct UpdateStats {
  double mean_ratio = 0.0;
  double clip_frac = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double first_batch_max_ratio_error = 0.0;  // max |rho - 1| over the very first minibatch
  std::vector<double> epoch_surrogate;       // mean clipped surrogate at the start of each epoch
  int minibatches = 0;
};

/// Non-finite loss during an update; parameters are left as of the previous minibatch.
class TrainingAbort : public Error {
 public:
  TrainingAbort(const std::string& what, int minibatch) : Error(what), minibatch_(minibatch) {}
  int minibatch() const { return minibatch_; }

 private:
  int minibatch_;
};

/// Converts stored mask bits into a float input batch.
nn::Tensor<float> make_batch(const nn::NetworkSpec& spec, std::span<const std::uint8_t* const> masks);
nn::Tensor<float> make_batch(const nn::NetworkSpec& spec, const sensor::SegMask& mask);

/// Clipped-objective PPO over `epochs` shuffled minibatch passes. Normalises
/// the buffer's advantages first. When track_surrogate is set, the mean
/// surrogate of the whole buffer is evaluated before each epoch.
UpdateStats ppo_update(RolloutBuffer& buffer, const nn::NetworkSpec& spec, nn::Parameters<float>& params,
                       nn::AdamState<float>& opt, const PpoConfig& config, Rng& rng,
                       bool track_surrogate = false);

struct CollectStats {
  double mean_reward = 0.0;
  double inside_frac = 0.0;
  int episodes = 0;
  int faults = 0;
};

/// Runs every environment for `horizon` policy steps, sampling actions from
/// the softmax policy with each environment's own generator.
RolloutBuffer collect_rollouts(std::span<const std::unique_ptr<Environment>> envs, const nn::NetworkSpec& spec,
                               const nn::Parameters<float>& params, int horizon, std::span<Rng> rngs,
                               CollectStats* stats = nullptr);

enum class InferMode { argmax, sample };

/// Policy action for one mask; argmax ties resolve to the lowest action id.
int infer(const nn::NetworkSpec& spec, const nn::Parameters<float>& params, const sensor::SegMask& mask,
          InferMode mode = InferMode::argmax, Rng* rng = nullptr);

struct CurveRecord {
  int update = 0;
  long step = 0;
  double mean_reward = 0.0;
  double mean_inside_frac = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  bool operator==(const CurveRecord&) const = default;
};

struct TrainState {
  nn::Parameters<float> params;
  nn::AdamState<float> opt;
  int update = 0;
  long steps_done = 0;
  std::vector<CurveRecord> curve;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(int index, std::uint64_t seed)>;

struct TrainHooks {
  /// Called after every completed update; return false to stop early.
  std::function<bool(const TrainState&)> on_update;
  /// Called every checkpoint_every updates and after the final update.
  std::function<void(const TrainState&)> on_checkpoint;
};

/// Alternates collection and updates until total_steps is consumed. Starts
/// from `resume` when given (environments are freshly reset on resume).
TrainState train(const nn::NetworkSpec& spec, const PpoConfig& config, const EnvFactory& make_env,
                 const TrainHooks& hooks = {}, const TrainState* resume = nullptr);

}  // namespace plume::rl
