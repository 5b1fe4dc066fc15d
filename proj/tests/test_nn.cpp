#include <doctest.h>

#include "plume/nn/adam.hpp"
#include "plume/nn/network.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace plume;
using namespace plume::nn;

namespace {

std::vector<double> randoms(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Central differences of f with respect to every entry of x.
std::vector<double> numeric_grad(std::vector<double>& x, const std::function<double()>& f, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f();
    x[i] = keep - h;
    const double fm = f();
    x[i] = keep;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), 1e-6}));
  return worst;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

NetworkSpec tiny_spec() {
  NetworkSpec s;
  s.height = 9;
  s.width = 9;
  s.convs = {{2, 3, 2}, {4, 2, 1}};
  s.trunk = 6;
  return s;
}

}  // namespace

TEST_CASE("hand convolution") {
  const ConvGeometry g{1, 3, 3, 1, 1, 2, 1};
  const std::vector<double> in(9, 1.0), w(4, 1.0), b(1, 0.0);
  std::vector<double> cols(static_cast<std::size_t>(g.patch()) * g.columns()), out(4);
  im2col<double>(g, in, cols);
  conv_forward<double>(g, w, b, cols, out);
  for (double v : out) CHECK(v == 4.0);
}

TEST_CASE("layer gradients match finite differences") {
  std::mt19937_64 rng(1);

  SUBCASE("dense") {
    const int B = 3, I = 5, O = 4;
    auto w = randoms(O * I, rng), b = randoms(O, rng), x = randoms(B * I, rng), c = randoms(B * O, rng);
    auto loss = [&] {
      std::vector<double> y(B * O);
      dense_forward<double>(B, I, O, w, b, x, y);
      return dot(y, c);
    };
    std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0), dx(x.size(), 0.0);
    dense_backward<double>(B, I, O, w, x, c, dw, db, dx);
    CHECK(max_rel_error(dw, numeric_grad(w, loss)) <= 1e-4);
    CHECK(max_rel_error(db, numeric_grad(b, loss)) <= 1e-4);
    CHECK(max_rel_error(dx, numeric_grad(x, loss)) <= 1e-4);
  }
  SUBCASE("conv") {
    const ConvGeometry g{2, 7, 6, 2, 3, 3, 2};
    auto w = randoms(static_cast<std::size_t>(g.out_c) * g.patch(), rng), b = randoms(g.out_c, rng);
    auto x = randoms(static_cast<std::size_t>(g.batch) * g.in_h * g.in_w * g.in_c, rng);
    const std::size_t n_out = static_cast<std::size_t>(g.columns()) * g.out_c;
    auto c = randoms(n_out, rng);
    auto loss = [&] {
      std::vector<double> cols(static_cast<std::size_t>(g.patch()) * g.columns()), y(n_out);
      im2col<double>(g, x, cols);
      conv_forward<double>(g, w, b, cols, y);
      return dot(y, c);
    };
    std::vector<double> cols(static_cast<std::size_t>(g.patch()) * g.columns());
    im2col<double>(g, x, cols);
    std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0), dcols(cols.size(), 0.0), dx(x.size(), 0.0);
    conv_backward<double>(g, w, cols, c, dw, db, dcols);
    col2im<double>(g, dcols, dx);
    CHECK(max_rel_error(dw, numeric_grad(w, loss)) <= 1e-4);
    CHECK(max_rel_error(db, numeric_grad(b, loss)) <= 1e-4);
    CHECK(max_rel_error(dx, numeric_grad(x, loss)) <= 1e-4);
  }
  SUBCASE("relu") {
    auto x = randoms(20, rng);
    auto c = randoms(20, rng);
    auto loss = [&] {
      auto y = x;
      relu_forward<double>(y);
      return dot(y, c);
    };
    auto y = x;
    relu_forward<double>(y);
    auto g = c;
    relu_backward<double>(y, g);
    CHECK(max_rel_error(g, numeric_grad(x, loss)) <= 1e-4);
  }
}

TEST_CASE("composed actor-critic gradients") {
  const auto spec = tiny_spec();
  REQUIRE(spec.param_count() <= 500);
  Rng rng(9);
  auto params = init_parameters<double>(spec, rng, 1.0);
  std::mt19937_64 r2(4);
  const int B = 2;
  Tensor<double> x({B, spec.height, spec.width, 1}, randoms(static_cast<std::size_t>(B) * 81, r2));
  const auto cl = randoms(static_cast<std::size_t>(B) * spec.actions, r2), cv = randoms(B, r2);

  auto flat = params.flatten();
  auto loss = [&] {
    Parameters<double> p = params;
    p.assign(flat);
    const auto f = forward(spec, p, x);
    return dot(f.logits, cl) + dot(f.values, cv);
  };
  const auto f = forward(spec, params, x);
  const auto g = backward<double>(spec, params, f.cache, cl, cv);
  CHECK(max_rel_error(g.flatten(), numeric_grad(flat, loss)) <= 1e-4);
}

TEST_CASE("single linear layer closed form") {
  // loss = 0.5 |W x + b - t|^2  ->  dW = (y - t) x^T
  const std::vector<double> w{0.5, -1.0, 2.0, 0.25}, b{0.1, -0.2}, x{1.5, -0.5}, t{0.3, 0.7};
  std::vector<double> y(2);
  dense_forward<double>(1, 2, 2, w, b, x, y);
  std::vector<double> r{y[0] - t[0], y[1] - t[1]};
  std::vector<double> dw(4, 0.0), db(2, 0.0), dx;
  dense_backward<double>(1, 2, 2, w, x, r, dw, db, dx);
  for (int o = 0; o < 2; ++o)
    for (int i = 0; i < 2; ++i) CHECK(dw[o * 2 + i] == doctest::Approx(r[o] * x[i]));
}

TEST_CASE("forward contract") {
  const auto spec = NetworkSpec::desk();
  const auto zero = Parameters<float>::zeros(spec);
  Tensor<float> x({2, 64, 64, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = (i * 7919) % 5 == 0;
  const auto f = forward(spec, zero, x);
  for (float v : f.logits) CHECK(v == 0.0f);
  for (float v : f.values) CHECK(v == 0.0f);

  Rng rng(2);
  const auto p = init_parameters<float>(spec, rng);
  Tensor<float> two({2, 64, 64, 1});
  for (int i = 0; i < 64 * 64; ++i) two.data[i] = two.data[64 * 64 + i] = i % 3 == 0;
  const auto g = forward(spec, p, two);
  for (int a = 0; a < 7; ++a) CHECK(g.logits[a] == g.logits[7 + a]);
  CHECK(forward(spec, p, two).logits == g.logits);

  Tensor<float> bad({1, 32, 32, 1});
  CHECK_THROWS_AS(forward(spec, p, bad), ShapeError);

  SUBCASE("stale cache is rejected") {
    auto q = p;
    const auto fw = forward(spec, q, two);
    auto grads = Gradients<float>::zeros(spec);
    grads.tensors[0].data[0] = 1.0f;
    auto opt = AdamState<float>::zeros_like(q);
    adam_update(q, grads, opt);
    const std::vector<float> dl(14, 0.0f), dv(2, 0.0f);
    CHECK_THROWS_AS(backward<float>(spec, q, fw.cache, dl, dv), ShapeError);
  }
  SUBCASE("zero upstream gradient") {
    const std::vector<float> dl(14, 0.0f), dv(2, 0.0f);
    const auto gr = backward<float>(spec, p, g.cache, dl, dv);
    for (const auto& t : gr.tensors)
      for (float v : t.data) CHECK(v == 0.0f);
  }
}

TEST_CASE("softmax, log-probs and entropy") {
  const std::vector<double> uniform(7, 0.3);
  const auto u = softmax_logprob_entropy<double>(uniform);
  for (double p : u.probs) CHECK(p == doctest::Approx(1.0 / 7));
  CHECK(u.entropy == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(u.entropy == doctest::Approx(1.945910).epsilon(1e-6));

  std::vector<double> spike(7, 0.0);
  spike[2] = 1000.0;
  const auto s = softmax_logprob_entropy<double>(spike);
  CHECK(s.probs[2] == doctest::Approx(1.0));
  CHECK(std::isfinite(s.entropy));
  CHECK(s.entropy == doctest::Approx(0.0));

  const std::vector<double> l{0.1, -2.0, 0.5, 3.0, 0.0, -1.0, 0.2};
  std::vector<double> shifted = l;
  for (auto& v : shifted) v += 17.0;
  const auto a = softmax_logprob_entropy<double>(l), b = softmax_logprob_entropy<double>(shifted);
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    CHECK(a.probs[i] == doctest::Approx(b.probs[i]).epsilon(1e-12));
    CHECK(a.probs[i] >= 0.0);
    sum += a.probs[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(argmax<double>(l) == 3);
  CHECK(argmax<double>(std::vector<double>(7, 0.0)) == 0);
}

TEST_CASE("adam") {
  NetworkSpec spec = tiny_spec();
  Rng rng(3);
  auto p = init_parameters<double>(spec, rng, 1.0);
  const auto before = p.flatten();
  auto opt = AdamState<double>::zeros_like(p, 3e-4);
  adam_update(p, Gradients<double>::zeros(spec), opt);
  CHECK(p.flatten() == before);

  auto q = init_parameters<double>(spec, rng, 1.0);
  const auto q0 = q.flatten();
  auto grads = Gradients<double>::zeros(spec);
  std::mt19937_64 r2(8);
  for (auto& t : grads.tensors)
    for (auto& v : t.data) v = randoms(1, r2, -2.0, 2.0)[0];
  auto o2 = AdamState<double>::zeros_like(q, 3e-4);
  adam_update(q, grads, o2);
  const auto q1 = q.flatten(), gf = grads.flatten();
  for (std::size_t i = 0; i < q1.size(); ++i)
    CHECK(q1[i] - q0[i] == doctest::Approx(-3e-4 * (gf[i] > 0 ? 1.0 : -1.0)).epsilon(1e-6));
  CHECK(o2.step == 1);

  SUBCASE("gradient clipping") {
    auto g = Gradients<double>::zeros(spec);
    g.tensors[0].data[0] = 3.0;
    g.tensors[1].data[0] = 4.0;
    CHECK(clip_grad_norm(g, 1.0) == doctest::Approx(5.0));
    CHECK(g.tensors[0].data[0] == doctest::Approx(0.6));
  }
}
