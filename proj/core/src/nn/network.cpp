#include "plume/nn/network.hpp"

#include <algorithm>
#include <cmath>

namespace plume::nn {

NetworkSpec NetworkSpec::desk() { return NetworkSpec{}; }

NetworkSpec NetworkSpec::paper() {
  NetworkSpec s;
  s.height = 320;
  s.width = 320;
  s.trunk = 512;
  return s;
}

void NetworkSpec::validate() const {
  if (in_channels <= 0 || height <= 0 || width <= 0 || trunk <= 0 || actions <= 0)
    throw ShapeError("network: dimensions must be positive");
  if (convs.empty()) throw ShapeError("network: at least one convolution required");
  int h = height, w = width, prev = 0;
  for (const ConvSpec& c : convs) {
    if (c.filters <= 0 || c.kernel <= 0 || c.stride <= 0) throw ShapeError("network: bad conv layer");
    if (c.filters <= prev) throw ShapeError("network: conv filter depths must be strictly increasing");
    if (c.kernel > h || c.kernel > w) throw ShapeError("network: kernel larger than feature map");
    h = (h - c.kernel) / c.stride + 1;
    w = (w - c.kernel) / c.stride + 1;
    prev = c.filters;
  }
}

std::vector<ConvGeometry> NetworkSpec::conv_geometry(int batch) const {
  std::vector<ConvGeometry> out;
  int h = height, w = width, c = in_channels;
  for (const ConvSpec& cs : convs) {
    ConvGeometry g{batch, h, w, c, cs.filters, cs.kernel, cs.stride};
    out.push_back(g);
    h = g.out_h();
    w = g.out_w();
    c = cs.filters;
  }
  return out;
}

int NetworkSpec::flat_features() const {
  const auto g = conv_geometry(1).back();
  return g.out_h() * g.out_w() * g.out_c;
}

std::vector<std::vector<int>> NetworkSpec::param_shapes() const {
  std::vector<std::vector<int>> shapes;
  int c = in_channels;
  for (const ConvSpec& cs : convs) {
    shapes.push_back({cs.filters, cs.kernel, cs.kernel, c});
    shapes.push_back({cs.filters});
    c = cs.filters;
  }
  shapes.push_back({trunk, flat_features()});
  shapes.push_back({trunk});
  shapes.push_back({actions, trunk});
  shapes.push_back({actions});
  shapes.push_back({1, trunk});
  shapes.push_back({1});
  return shapes;
}

std::size_t NetworkSpec::param_count() const {
  std::size_t n = 0;
  for (const auto& s : param_shapes()) n += shape_size(s);
  return n;
}

template <typename T>
Parameters<T> Parameters<T>::zeros(const NetworkSpec& spec) {
  Parameters<T> p;
  for (auto& s : spec.param_shapes()) p.tensors.emplace_back(s);
  return p;
}

template <typename T>
std::size_t Parameters<T>::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

template <typename T>
bool Parameters<T>::same_shapes(const Parameters& other) const {
  if (tensors.size() != other.tensors.size()) return false;
  for (std::size_t i = 0; i < tensors.size(); ++i)
    if (tensors[i].shape != other.tensors[i].shape) return false;
  return true;
}

template <typename T>
std::vector<T> Parameters<T>::flatten() const {
  std::vector<T> flat;
  flat.reserve(count());
  for (const auto& t : tensors) flat.insert(flat.end(), t.data.begin(), t.data.end());
  return flat;
}

template <typename T>
void Parameters<T>::assign(std::span<const T> flat) {
  if (flat.size() != count()) throw ShapeError("parameter count mismatch");
  std::size_t off = 0;
  for (auto& t : tensors) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), t.size(), t.data.begin());
    off += t.size();
  }
  ++version;
}

template <typename T>
bool Parameters<T>::all_finite() const {
  for (const auto& t : tensors)
    for (T v : t.data)
      if (!std::isfinite(v)) return false;
  return true;
}

template <typename T>
Parameters<T> init_parameters(const NetworkSpec& spec, Rng& rng, double actor_scale) {
  spec.validate();
  Parameters<T> p = Parameters<T>::zeros(spec);
  const std::size_t n_conv = spec.convs.size();
  for (std::size_t i = 0; i < p.tensors.size(); i += 2) {
    Tensor<T>& w = p.tensors[i];
    const int fan_in = static_cast<int>(w.size() / static_cast<std::size_t>(w.shape[0]));
    double bound = std::sqrt(6.0 / fan_in);
    const std::size_t layer = i / 2;
    if (layer == n_conv + 1) bound *= actor_scale;              // policy head
    if (layer == n_conv + 2) bound = std::sqrt(1.0 / fan_in);   // value head
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (T& v : w.data) v = static_cast<T>(dist(rng));
  }
  return p;
}

template <typename T>
ForwardResult<T> forward(const NetworkSpec& spec, const Parameters<T>& params, const Tensor<T>& input) {
  if (input.shape.size() != 4 || input.shape[1] != spec.height || input.shape[2] != spec.width ||
      input.shape[3] != spec.in_channels)
    throw ShapeError("forward: input shape " + shape_string(input.shape) + " does not match network");
  const int B = input.shape[0];
  if (B <= 0) throw ShapeError("forward: empty batch");
  if (params.tensors.size() != spec.param_shapes().size()) throw ShapeError("forward: parameter layout mismatch");
  {
    const auto shapes = spec.param_shapes();
    for (std::size_t i = 0; i < shapes.size(); ++i)
      if (params.tensors[i].shape != shapes[i]) throw ShapeError("forward: parameter shape mismatch");
  }

  ForwardResult<T> r;
  ForwardCache<T>& c = r.cache;
  c.batch = B;
  c.param_version = params.version;
  c.param_count = params.count();
  c.input = input.data;

  const auto geo = spec.conv_geometry(B);
  std::span<const T> act = c.input;
  for (std::size_t l = 0; l < geo.size(); ++l) {
    const ConvGeometry& g = geo[l];
    c.cols.emplace_back(static_cast<std::size_t>(g.patch()) * g.columns());
    im2col<T>(g, act, c.cols.back());
    c.conv_act.emplace_back(static_cast<std::size_t>(g.out_c) * g.columns());
    conv_forward<T>(g, params.tensors[2 * l].data, params.tensors[2 * l + 1].data, c.cols.back(),
                    c.conv_act.back());
    relu_forward<T>(c.conv_act.back());
    act = c.conv_act.back();
  }

  const std::size_t k = 2 * geo.size();
  const int F = spec.flat_features();
  c.trunk_act.resize(static_cast<std::size_t>(spec.trunk) * B);
  dense_forward<T>(B, F, spec.trunk, params.tensors[k].data, params.tensors[k + 1].data, act, c.trunk_act);
  relu_forward<T>(c.trunk_act);

  r.logits.resize(static_cast<std::size_t>(spec.actions) * B);
  dense_forward<T>(B, spec.trunk, spec.actions, params.tensors[k + 2].data, params.tensors[k + 3].data,
                   c.trunk_act, r.logits);
  r.values.resize(B);
  dense_forward<T>(B, spec.trunk, 1, params.tensors[k + 4].data, params.tensors[k + 5].data, c.trunk_act,
                   r.values);
  return r;
}

template <typename T>
Gradients<T> backward(const NetworkSpec& spec, const Parameters<T>& params, const ForwardCache<T>& cache,
                      std::span<const T> dlogits, std::span<const T> dvalues) {
  const int B = cache.batch;
  if (cache.param_version != params.version || cache.param_count != params.count() ||
      cache.conv_act.size() != spec.convs.size())
    throw ShapeError("backward: cache was produced by different parameters");
  if (dlogits.size() != static_cast<std::size_t>(B) * spec.actions || dvalues.size() != static_cast<std::size_t>(B))
    throw ShapeError("backward: upstream gradient does not match cached batch");

  Gradients<T> g = Parameters<T>::zeros(spec);
  const auto geo = spec.conv_geometry(B);
  const std::size_t k = 2 * geo.size();
  const int F = spec.flat_features();

  std::vector<T> dtrunk(static_cast<std::size_t>(spec.trunk) * B, T{0});
  std::vector<T> tmp(dtrunk.size());
  dense_backward<T>(B, spec.trunk, spec.actions, params.tensors[k + 2].data, cache.trunk_act, dlogits,
                    g.tensors[k + 2].data, g.tensors[k + 3].data, dtrunk);
  dense_backward<T>(B, spec.trunk, 1, params.tensors[k + 4].data, cache.trunk_act, dvalues,
                    g.tensors[k + 4].data, g.tensors[k + 5].data, tmp);
  for (std::size_t i = 0; i < dtrunk.size(); ++i) dtrunk[i] += tmp[i];
  relu_backward<T>(cache.trunk_act, dtrunk);

  std::vector<T> dact(static_cast<std::size_t>(F) * B);
  dense_backward<T>(B, F, spec.trunk, params.tensors[k].data, cache.conv_act.back(), dtrunk,
                    g.tensors[k].data, g.tensors[k + 1].data, dact);

  for (std::size_t l = geo.size(); l-- > 0;) {
    const ConvGeometry& cg = geo[l];
    relu_backward<T>(cache.conv_act[l], dact);
    std::vector<T> dcols;
    if (l > 0) dcols.resize(static_cast<std::size_t>(cg.patch()) * cg.columns());
    conv_backward<T>(cg, params.tensors[2 * l].data, cache.cols[l], dact, g.tensors[2 * l].data,
                     g.tensors[2 * l + 1].data, dcols);
    if (l > 0) {
      std::vector<T> dprev(static_cast<std::size_t>(cg.batch) * cg.in_h * cg.in_w * cg.in_c, T{0});
      col2im<T>(cg, dcols, dprev);
      dact = std::move(dprev);
    }
  }
  return g;
}

template <typename T>
PolicyTerms<T> softmax_logprob_entropy(std::span<const T> logits) {
  PolicyTerms<T> out;
  const std::size_t n = logits.size();
  out.probs.resize(n);
  out.log_probs.resize(n);
  const T mx = *std::max_element(logits.begin(), logits.end());
  T z{0};
  for (std::size_t i = 0; i < n; ++i) z += std::exp(logits[i] - mx);
  const T log_z = std::log(z);
  T h{0};
  for (std::size_t i = 0; i < n; ++i) {
    out.log_probs[i] = logits[i] - mx - log_z;
    out.probs[i] = std::exp(out.log_probs[i]);
    h -= out.probs[i] * out.log_probs[i];
  }
  out.entropy = h;
  return out;
}

template <typename T>
int argmax(std::span<const T> logits) {
  int best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  return best;
}

#define PLUME_INSTANTIATE_NETWORK(T)                                                                    \
  template struct Parameters<T>;                                                                        \
  template Parameters<T> init_parameters<T>(const NetworkSpec&, Rng&, double);                          \
  template ForwardResult<T> forward<T>(const NetworkSpec&, const Parameters<T>&, const Tensor<T>&);     \
  template Gradients<T> backward<T>(const NetworkSpec&, const Parameters<T>&, const ForwardCache<T>&,   \
                                    std::span<const T>, std::span<const T>);                            \
  template PolicyTerms<T> softmax_logprob_entropy<T>(std::span<const T>);                               \
  template int argmax<T>(std::span<const T>);

PLUME_INSTANTIATE_NETWORK(float)
PLUME_INSTANTIATE_NETWORK(double)

}  // namespace plume::nn
