#include "plume/nn/layers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstring>
#include <sstream>

namespace plume::nn {

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

template <typename T>
using MatC = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

}  // namespace

template <typename T>
void im2col(const ConvGeometry& g, std::span<const T> input, std::span<T> cols) {
  const int oh = g.out_h(), ow = g.out_w(), patch = g.patch();
  const std::size_t run = static_cast<std::size_t>(g.kernel) * g.in_c;  // contiguous along kx, c
  T* dst = cols.data();
  for (int b = 0; b < g.batch; ++b) {
    const T* img = input.data() + static_cast<std::size_t>(b) * g.in_h * g.in_w * g.in_c;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int ky = 0; ky < g.kernel; ++ky) {
          const T* src = img + (static_cast<std::size_t>(oy * g.stride + ky) * g.in_w + ox * g.stride) * g.in_c;
          std::memcpy(dst + static_cast<std::size_t>(ky) * run, src, run * sizeof(T));
        }
        dst += patch;
      }
    }
  }
}

template <typename T>
void col2im(const ConvGeometry& g, std::span<const T> dcols, std::span<T> dinput) {
  const int oh = g.out_h(), ow = g.out_w(), patch = g.patch();
  const std::size_t run = static_cast<std::size_t>(g.kernel) * g.in_c;
  const T* src = dcols.data();
  for (int b = 0; b < g.batch; ++b) {
    T* img = dinput.data() + static_cast<std::size_t>(b) * g.in_h * g.in_w * g.in_c;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int ky = 0; ky < g.kernel; ++ky) {
          T* dst = img + (static_cast<std::size_t>(oy * g.stride + ky) * g.in_w + ox * g.stride) * g.in_c;
          const T* s = src + static_cast<std::size_t>(ky) * run;
          for (std::size_t i = 0; i < run; ++i) dst[i] += s[i];
        }
        src += patch;
      }
    }
  }
}

// Fixed summation order; Eigen's vectorised rowwise().sum() depends on alignment.
template <typename T>
void add_row_sums(const Eigen::Map<const MatC<T>>& m, Eigen::Map<VecT<T>>& acc) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) acc[r] += m(r, c);
}

template <typename T>
void conv_forward(const ConvGeometry& g, std::span<const T> weight, std::span<const T> bias,
                  std::span<const T> cols, std::span<T> out) {
  Eigen::Map<const MatR<T>> W(weight.data(), g.out_c, g.patch());
  Eigen::Map<const MatC<T>> C(cols.data(), g.patch(), g.columns());
  Eigen::Map<const VecT<T>> b(bias.data(), g.out_c);
  Eigen::Map<MatC<T>> Y(out.data(), g.out_c, g.columns());
  Y.noalias() = W * C;
  Y.colwise() += b;
}

template <typename T>
void conv_backward(const ConvGeometry& g, std::span<const T> weight, std::span<const T> cols,
                   std::span<const T> dout, std::span<T> dweight, std::span<T> dbias, std::span<T> dcols) {
  Eigen::Map<const MatR<T>> W(weight.data(), g.out_c, g.patch());
  Eigen::Map<const MatC<T>> C(cols.data(), g.patch(), g.columns());
  Eigen::Map<const MatC<T>> dY(dout.data(), g.out_c, g.columns());
  Eigen::Map<MatR<T>> dW(dweight.data(), g.out_c, g.patch());
  Eigen::Map<VecT<T>> db(dbias.data(), g.out_c);
  dW.noalias() += dY * C.transpose();
  add_row_sums(dY, db);
  if (!dcols.empty()) {
    Eigen::Map<MatC<T>> dC(dcols.data(), g.patch(), g.columns());
    dC.noalias() = W.transpose() * dY;
  }
}

template <typename T>
void dense_forward(int batch, int in, int out, std::span<const T> weight, std::span<const T> bias,
                   std::span<const T> x, std::span<T> y) {
  Eigen::Map<const MatR<T>> W(weight.data(), out, in);
  Eigen::Map<const MatC<T>> X(x.data(), in, batch);
  Eigen::Map<const VecT<T>> b(bias.data(), out);
  Eigen::Map<MatC<T>> Y(y.data(), out, batch);
  Y.noalias() = W * X;
  Y.colwise() += b;
}

template <typename T>
void dense_backward(int batch, int in, int out, std::span<const T> weight, std::span<const T> x,
                    std::span<const T> dy, std::span<T> dweight, std::span<T> dbias, std::span<T> dx) {
  Eigen::Map<const MatR<T>> W(weight.data(), out, in);
  Eigen::Map<const MatC<T>> X(x.data(), in, batch);
  Eigen::Map<const MatC<T>> dY(dy.data(), out, batch);
  Eigen::Map<MatR<T>> dW(dweight.data(), out, in);
  Eigen::Map<VecT<T>> db(dbias.data(), out);
  dW.noalias() += dY * X.transpose();
  add_row_sums(dY, db);
  if (!dx.empty()) {
    Eigen::Map<MatC<T>> dX(dx.data(), in, batch);
    dX.noalias() = W.transpose() * dY;
  }
}

template <typename T>
void relu_forward(std::span<T> x) {
  for (T& v : x) v = v > T{0} ? v : T{0};
}

template <typename T>
void relu_backward(std::span<const T> activated, std::span<T> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(activated[i] > T{0})) grad[i] = T{0};
}

#define PLUME_INSTANTIATE_LAYERS(T)                                                                       \
  template void im2col<T>(const ConvGeometry&, std::span<const T>, std::span<T>);                         \
  template void col2im<T>(const ConvGeometry&, std::span<const T>, std::span<T>);                         \
  template void conv_forward<T>(const ConvGeometry&, std::span<const T>, std::span<const T>,              \
                                std::span<const T>, std::span<T>);                                        \
  template void conv_backward<T>(const ConvGeometry&, std::span<const T>, std::span<const T>,             \
                                 std::span<const T>, std::span<T>, std::span<T>, std::span<T>);           \
  template void dense_forward<T>(int, int, int, std::span<const T>, std::span<const T>,                   \
                                 std::span<const T>, std::span<T>);                                       \
  template void dense_backward<T>(int, int, int, std::span<const T>, std::span<const T>,                  \
                                  std::span<const T>, std::span<T>, std::span<T>, std::span<T>);          \
  template void relu_forward<T>(std::span<T>);                                                            \
  template void relu_backward<T>(std::span<const T>, std::span<T>);

PLUME_INSTANTIATE_LAYERS(float)
PLUME_INSTANTIATE_LAYERS(double)

}  // namespace plume::nn
