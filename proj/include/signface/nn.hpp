#pragma once

// Temporal-convolution classifier for landmark feature tensors.
//
//   x (T x D)  --conv1d(valid, stride 1)-->  F x T'   --ReLU-->  flatten (F*T')
//              --fc1-->  hidden  --fc2-->  logits (num_classes)
//
// with T' = T - k + 1. Every routine is templated on the scalar type; the
// library instantiates double everywhere. Gradients are hand-derived for this
// fixed architecture.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "signface/errors.hpp"
#include "signface/rng.hpp"

namespace signface::nn {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct ClassifierConfig {
  int input_channels = 140;
  int input_length = 300;
  int conv_filters = 16;
  int kernel_size = 5;
  int hidden_units = 64;
  int num_classes = 3;
  std::uint64_t seed = 0;

  int conv_length() const { return input_length - kernel_size + 1; }
  int flat_size() const { return conv_filters * conv_length(); }

  void validate() const {
    if (input_channels < 1 || input_length < 1 || conv_filters < 1 || kernel_size < 1 ||
        hidden_units < 1)
      throw ConfigError("classifier: all layer sizes must be >= 1");
    if (kernel_size > input_length)
      throw ConfigError("classifier: kernel_size exceeds input_length");
    if (num_classes != 3) throw ConfigError("classifier: num_classes must be 3");
  }

  bool operator==(const ClassifierConfig&) const = default;
};

/// Trainable tensors. conv_w is F x (k*D): column j*D + c holds tap j of
/// input channel c, so a window of k consecutive frames multiplies it directly.
template <class Scalar>
struct Params {
  Matrix<Scalar> conv_w;
  Vector<Scalar> conv_b;
  Matrix<Scalar> fc1_w;
  Vector<Scalar> fc1_b;
  Matrix<Scalar> fc2_w;
  Vector<Scalar> fc2_b;

  static Params zeros(const ClassifierConfig& cfg) {
    Params p;
    p.conv_w = Matrix<Scalar>::Zero(cfg.conv_filters, cfg.kernel_size * cfg.input_channels);
    p.conv_b = Vector<Scalar>::Zero(cfg.conv_filters);
    p.fc1_w = Matrix<Scalar>::Zero(cfg.hidden_units, cfg.flat_size());
    p.fc1_b = Vector<Scalar>::Zero(cfg.hidden_units);
    p.fc2_w = Matrix<Scalar>::Zero(cfg.num_classes, cfg.hidden_units);
    p.fc2_b = Vector<Scalar>::Zero(cfg.num_classes);
    return p;
  }

  /// Weight of filter f, input channel c, tap j.
  Scalar& conv(int f, int c, int j, int channels) { return conv_w(f, j * channels + c); }
  Scalar conv(int f, int c, int j, int channels) const { return conv_w(f, j * channels + c); }

  bool matches(const ClassifierConfig& cfg) const {
    return conv_w.rows() == cfg.conv_filters &&
           conv_w.cols() == cfg.kernel_size * cfg.input_channels &&
           conv_b.size() == cfg.conv_filters && fc1_w.rows() == cfg.hidden_units &&
           fc1_w.cols() == cfg.flat_size() && fc1_b.size() == cfg.hidden_units &&
           fc2_w.rows() == cfg.num_classes && fc2_w.cols() == cfg.hidden_units &&
           fc2_b.size() == cfg.num_classes;
  }

  /// Calls f(name, tensor) for each tensor, in a fixed order.
  template <class F>
  void visit(F&& f) {
    f("conv_w", conv_w);
    f("conv_b", conv_b);
    f("fc1_w", fc1_w);
    f("fc1_b", fc1_b);
    f("fc2_w", fc2_w);
    f("fc2_b", fc2_b);
  }
  template <class F>
  void visit(F&& f) const {
    f("conv_w", conv_w);
    f("conv_b", conv_b);
    f("fc1_w", fc1_w);
    f("fc1_b", fc1_b);
    f("fc2_w", fc2_w);
    f("fc2_b", fc2_b);
  }

  Params& operator+=(const Params& o) {
    conv_w += o.conv_w;
    conv_b += o.conv_b;
    fc1_w += o.fc1_w;
    fc1_b += o.fc1_b;
    fc2_w += o.fc2_w;
    fc2_b += o.fc2_b;
    return *this;
  }
  Params& operator*=(Scalar s) {
    visit([s](const char*, auto& t) { t *= s; });
    return *this;
  }

  bool operator==(const Params& o) const {
    return conv_w == o.conv_w && conv_b == o.conv_b && fc1_w == o.fc1_w &&
           fc1_b == o.fc1_b && fc2_w == o.fc2_w && fc2_b == o.fc2_b;
  }
};

template <class Scalar>
using GradientSet = Params<Scalar>;

/// He-uniform for conv and fc1 (followed by / feeding the ReLU), Glorot-uniform
/// for fc2, zero biases. Each tensor draws from its own sub-stream of cfg.seed.
template <class Scalar>
Params<Scalar> init_params(const ClassifierConfig& cfg) {
  cfg.validate();
  auto p = Params<Scalar>::zeros(cfg);
  auto fill = [&](Matrix<Scalar>& w, std::uint64_t tag, double limit) {
    Rng rng(derive_seed(cfg.seed, {tag}));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        w(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
  };
  const double conv_fan_in = double(cfg.input_channels) * cfg.kernel_size;
  fill(p.conv_w, 1, std::sqrt(6.0 / conv_fan_in));
  fill(p.fc1_w, 2, std::sqrt(6.0 / double(cfg.flat_size())));
  fill(p.fc2_w, 3, std::sqrt(6.0 / double(cfg.hidden_units + cfg.num_classes)));
  return p;
}

template <class Scalar>
struct ForwardCache {
  Matrix<Scalar> input_t;    // D x T, one frame per column
  RowMatrix<Scalar> hidden;  // F x T' after ReLU, row-major so it flattens filter-major
  Vector<Scalar> fc1_out;
};

namespace detail {

/// k*D x T' view whose column t stacks frames t..t+k-1. Columns overlap in
/// memory, so the view is read-only.
template <class Scalar>
auto windows(const Matrix<Scalar>& input_t, int kernel, int out_len) {
  using Map = Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>>;
  return Map(input_t.data(), input_t.rows() * kernel, out_len,
             Eigen::OuterStride<>(input_t.rows()));
}

}  // namespace detail

/// x is the T x D feature tensor (row = frame).
template <class Scalar, class Derived>
std::pair<Vector<Scalar>, ForwardCache<Scalar>> forward(const ClassifierConfig& cfg,
                                                        const Params<Scalar>& params,
                                                        const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != cfg.input_length || x.cols() != cfg.input_channels)
    throw ShapeError("forward: input is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", expected " +
                     std::to_string(cfg.input_length) + "x" +
                     std::to_string(cfg.input_channels));
  if (!params.matches(cfg)) throw ShapeError("forward: parameter shapes do not match config");

  const int out_len = cfg.conv_length();
  ForwardCache<Scalar> cache;
  cache.input_t = x.transpose();
  const auto win = detail::windows(cache.input_t, cfg.kernel_size, out_len);

  Matrix<Scalar> conv = params.conv_w * win;
  conv.colwise() += params.conv_b;
  cache.hidden = conv.cwiseMax(Scalar(0));

  const Eigen::Map<const Vector<Scalar>> flat(cache.hidden.data(), cache.hidden.size());
  cache.fc1_out = params.fc1_w * flat + params.fc1_b;
  Vector<Scalar> logits = params.fc2_w * cache.fc1_out + params.fc2_b;
  return {std::move(logits), std::move(cache)};
}

/// Adds d(loss)/d(params) for one sample into `grads`.
template <class Scalar>
void accumulate_gradients(const ClassifierConfig& cfg, const Params<Scalar>& params,
                          const ForwardCache<Scalar>& cache, const Vector<Scalar>& dlogits,
                          GradientSet<Scalar>& grads) {
  if (dlogits.size() != cfg.num_classes || !params.matches(cfg) || !grads.matches(cfg) ||
      cache.hidden.rows() != cfg.conv_filters || cache.hidden.cols() != cfg.conv_length() ||
      cache.input_t.rows() != cfg.input_channels || cache.input_t.cols() != cfg.input_length)
    throw ShapeError("backward: cache, gradients or dlogits do not match config");

  grads.fc2_b += dlogits;
  grads.fc2_w.noalias() += dlogits * cache.fc1_out.transpose();
  const Vector<Scalar> d_fc1 = params.fc2_w.transpose() * dlogits;

  grads.fc1_b += d_fc1;
  const Eigen::Map<const Vector<Scalar>> flat(cache.hidden.data(), cache.hidden.size());
  grads.fc1_w.noalias() += d_fc1 * flat.transpose();

  RowMatrix<Scalar> d_hidden(cfg.conv_filters, cfg.conv_length());
  Eigen::Map<Vector<Scalar>>(d_hidden.data(), d_hidden.size()).noalias() =
      params.fc1_w.transpose() * d_fc1;
  d_hidden = (cache.hidden.array() > Scalar(0)).select(d_hidden, Scalar(0));

  grads.conv_b += d_hidden.rowwise().sum();
  const auto win = detail::windows(cache.input_t, cfg.kernel_size, cfg.conv_length());
  grads.conv_w.noalias() += d_hidden * win.transpose();
}

template <class Scalar>
GradientSet<Scalar> backward(const ClassifierConfig& cfg, const Params<Scalar>& params,
                             const ForwardCache<Scalar>& cache,
                             const Vector<Scalar>& dlogits) {
  auto grads = GradientSet<Scalar>::zeros(cfg);
  accumulate_gradients(cfg, params, cache, dlogits, grads);
  return grads;
}

/// Numerically stable softmax (max subtracted first).
template <class Derived>
auto softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

template <class Scalar>
struct LossAndGrad {
  Scalar loss;
  Vector<Scalar> dlogits;
};

/// loss = -ln softmax(logits)[label], dlogits = softmax(logits) - onehot(label).
template <class Derived>
auto softmax_cross_entropy(const Eigen::MatrixBase<Derived>& logits, int label) {
  using Scalar = typename Derived::Scalar;
  if (label < 0 || label >= logits.size()) throw ShapeError("cross entropy: label out of range");
  const Scalar shift = logits.maxCoeff();
  const Vector<Scalar> shifted = logits.array() - shift;
  const Scalar log_sum = std::log(shifted.array().exp().sum());
  LossAndGrad<Scalar> out;
  out.loss = log_sum - shifted(label);
  out.dlogits = (shifted.array() - log_sum).exp().matrix();
  out.dlogits(label) -= Scalar(1);
  return out;
}

/// Index of the largest logit; ties go to the lowest index.
template <class Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

template <class Scalar>
struct AdamState {
  Params<Scalar> m;
  Params<Scalar> v;

  static AdamState zeros(const ClassifierConfig& cfg) {
    return {Params<Scalar>::zeros(cfg), Params<Scalar>::zeros(cfg)};
  }
  bool operator==(const AdamState&) const = default;
};

/// In-place Adam update with bias correction. step counts from 1.
template <class Scalar>
void adam_update(Params<Scalar>& params, AdamState<Scalar>& state,
                 const GradientSet<Scalar>& grads, Scalar lr, int step) {
  if (step < 1) throw ConfigError("adam: step must be >= 1");
  const Scalar b1 = Scalar(kAdamBeta1), b2 = Scalar(kAdamBeta2), eps = Scalar(kAdamEps);
  const Scalar corr1 = Scalar(1) - std::pow(b1, Scalar(step));
  const Scalar corr2 = Scalar(1) - std::pow(b2, Scalar(step));
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
  };
  update(params.conv_w, state.m.conv_w, state.v.conv_w, grads.conv_w);
  update(params.conv_b, state.m.conv_b, state.v.conv_b, grads.conv_b);
  update(params.fc1_w, state.m.fc1_w, state.v.fc1_w, grads.fc1_w);
  update(params.fc1_b, state.m.fc1_b, state.v.fc1_b, grads.fc1_b);
  update(params.fc2_w, state.m.fc2_w, state.v.fc2_w, grads.fc2_w);
  update(params.fc2_b, state.m.fc2_b, state.v.fc2_b, grads.fc2_b);
}

template <class Scalar>
std::pair<Params<Scalar>, AdamState<Scalar>> adam_step(Params<Scalar> params,
                                                       const GradientSet<Scalar>& grads,
                                                       AdamState<Scalar> state, Scalar lr,
                                                       int step) {
  adam_update(params, state, grads, lr, step);
  return {std::move(params), std::move(state)};
}

}  // namespace signface::nn
