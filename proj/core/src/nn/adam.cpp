#include "plume/nn/adam.hpp"

#include <cmath>

namespace plume::nn {

template <typename T>
AdamState<T> AdamState<T>::zeros_like(const Parameters<T>& params, double lr) {
  AdamState<T> s;
  s.lr = lr;
  for (const auto& t : params.tensors) {
    s.m.emplace_back(t.size(), T{0});
    s.v.emplace_back(t.size(), T{0});
  }
  return s;
}

template <typename T>
void adam_update(Parameters<T>& params, const Gradients<T>& grads, AdamState<T>& s) {
  if (!params.same_shapes(grads) || s.m.size() != params.tensors.size())
    throw ShapeError("adam_update: shape mismatch");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  const T b1 = static_cast<T>(s.beta1), b2 = static_cast<T>(s.beta2);
  const T step_size = static_cast<T>(s.lr / c1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
  const T eps = static_cast<T>(s.eps);
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto& p = params.tensors[i].data;
    const auto& g = grads.tensors[i].data;
    auto& m = s.m[i];
    auto& v = s.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T{1} - b1) * g[j];
      v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
      p[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
    }
  }
  ++params.version;
}

template <typename T>
double clip_grad_norm(Gradients<T>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& t : grads.tensors)
    for (T v : t.data) sq += static_cast<double>(v) * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / (norm + 1e-6));
    for (auto& t : grads.tensors)
      for (T& v : t.data) v *= scale;
  }
  return norm;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_update<float>(Parameters<float>&, const Gradients<float>&, AdamState<float>&);
template void adam_update<double>(Parameters<double>&, const Gradients<double>&, AdamState<double>&);
template double clip_grad_norm<float>(Gradients<float>&, double);
template double clip_grad_norm<double>(Gradients<double>&, double);

}  // namespace plume::nn
