#pragma once

#include "plume/nn/network.hpp"

namespace plume::nn {

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  long step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros_like(const Parameters<T>& params, double lr = 3e-4);
};

/// Bias-corrected adaptive-moment step, in place. Bumps params.version.
template <typename T>
void adam_update(Parameters<T>& params, const Gradients<T>& grads, AdamState<T>& state);

/// Rescales grads so their global L2 norm is at most max_norm; returns the
/// norm before scaling.
template <typename T>
double clip_grad_norm(Gradients<T>& grads, double max_norm);

}  // namespace plume::nn
