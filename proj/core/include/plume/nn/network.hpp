#pragma once

#include "plume/nn/layers.hpp"
#include "plume/nn/tensor.hpp"
#include "plume/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace plume::nn {

struct ConvSpec {
  int filters = 0;
  int kernel = 0;
  int stride = 1;
  bool operator==(const ConvSpec&) const = default;
};

/// Actor-critic CNN: conv+ReLU stack, flatten, dense+ReLU trunk, then a
/// policy head (logits) and a value head sharing the trunk.
struct NetworkSpec {
  int in_channels = 1;
  int height = 64;
  int width = 64;
  std::vector<ConvSpec> convs{{32, 8, 4}, {64, 4, 2}, {128, 3, 1}};
  int trunk = 256;
  int actions = 7;

  /// 64x64 masks, trunk 256.
  static NetworkSpec desk();
  /// 320x320 masks, trunk 512.
  static NetworkSpec paper();

  /// Throws ShapeError when the stack does not fit the input or filter
  /// depths are not strictly increasing.
  void validate() const;

  std::vector<ConvGeometry> conv_geometry(int batch) const;
  int flat_features() const;
  /// Weight/bias shapes in declaration order.
  std::vector<std::vector<int>> param_shapes() const;
  std::size_t param_count() const;
  bool operator==(const NetworkSpec&) const = default;
};

template <typename T>
struct Parameters {
  std::vector<Tensor<T>> tensors;  // declaration order, see NetworkSpec::param_shapes
  std::uint64_t version = 0;       // bumped on every in-place update

  static Parameters zeros(const NetworkSpec& spec);
  std::size_t count() const;
  bool same_shapes(const Parameters& other) const;
  /// Flat copy / assignment in declaration order.
  std::vector<T> flatten() const;
  void assign(std::span<const T> flat);
  bool all_finite() const;
};

template <typename T>
using Gradients = Parameters<T>;

/// Fan-in scaled centred uniform initialisation: hidden layers use
/// U(+-sqrt(6/fan_in)), the policy head is further scaled by actor_scale so the
/// initial policy is near uniform. Biases start at zero.
template <typename T>
Parameters<T> init_parameters(const NetworkSpec& spec, Rng& rng, double actor_scale = 0.01);

template <typename T>
struct ForwardCache {
  int batch = 0;
  std::uint64_t param_version = 0;
  std::size_t param_count = 0;
  std::vector<T> input;
  std::vector<std::vector<T>> cols;      // im2col per conv layer
  std::vector<std::vector<T>> conv_act;  // post-ReLU conv outputs
  std::vector<T> trunk_act;              // post-ReLU trunk
};

template <typename T>
struct ForwardResult {
  std::vector<T> logits;  // [batch, actions]
  std::vector<T> values;  // [batch]
  ForwardCache<T> cache;
};

/// Input is [batch, height, width, channels].
template <typename T>
ForwardResult<T> forward(const NetworkSpec& spec, const Parameters<T>& params, const Tensor<T>& input);

/// Reverse pass of the scalar loss whose gradients w.r.t. logits and values
/// are given. Rejects caches produced from different parameters or batch.
template <typename T>
Gradients<T> backward(const NetworkSpec& spec, const Parameters<T>& params, const ForwardCache<T>& cache,
                      std::span<const T> dlogits, std::span<const T> dvalues);

template <typename T>
struct PolicyTerms {
  std::vector<T> probs;
  std::vector<T> log_probs;
  T entropy{};
};

/// Max-subtracted softmax with log-probabilities and entropy.
template <typename T>
PolicyTerms<T> softmax_logprob_entropy(std::span<const T> logits);

/// Index of the largest logit; ties go to the lowest index.
template <typename T>
int argmax(std::span<const T> logits);

template <typename To, typename From>
Parameters<To> cast_parameters(const Parameters<From>& p) {
  Parameters<To> out;
  out.version = p.version;
  for (const auto& t : p.tensors) {
    Tensor<To> c(t.shape);
    for (std::size_t i = 0; i < t.size(); ++i) c.data[i] = static_cast<To>(t.data[i]);
    out.tensors.push_back(std::move(c));
  }
  return out;
}

}  // namespace plume::nn
