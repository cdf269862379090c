#include <doctest.h>

#include <cmath>

#include "signface/errors.hpp"
#include "signface/nn.hpp"
#include "support/oracles.hpp"

using namespace signface;
using namespace signface::nn;
using signface::testing::max_gradient_rel_error;
using signface::testing::random_matrix;
using signface::testing::random_params;

namespace {

ClassifierConfig small_config() {
  ClassifierConfig c;
  c.input_channels = 6;
  c.input_length = 12;
  c.conv_filters = 2;
  c.kernel_size = 3;
  c.hidden_units = 4;
  c.seed = 1;
  return c;
}

}  // namespace

TEST_CASE("init_params") {
  ClassifierConfig cfg;  // 140 channels, 300 frames
  cfg.seed = 42;
  const auto a = init_params<double>(cfg);
  const auto b = init_params<double>(cfg);
  CHECK(a == b);
  CHECK(a.conv_b.isZero(0.0));
  CHECK(a.fc1_b.isZero(0.0));
  CHECK(a.fc2_b.isZero(0.0));
  CHECK(a.matches(cfg));

  // He-uniform: Var = 2 / fan_in.
  const double fan_in = 140.0 * 5;
  const double mean = a.conv_w.mean();
  const double var = (a.conv_w.array() - mean).square().sum() / double(a.conv_w.size() - 1);
  CHECK(std::abs(var - 2.0 / fan_in) < 0.2 * 2.0 / fan_in);

  cfg.seed = 43;
  CHECK_FALSE(init_params<double>(cfg) == a);
}

TEST_CASE("forward shapes") {
  ClassifierConfig cfg;
  cfg.seed = 3;
  CHECK(cfg.conv_length() == 296);
  CHECK(cfg.flat_size() == 4736);
  Rng rng(1);
  const auto p = init_params<double>(cfg);
  const auto x = random_matrix(rng, 300, 140);
  const auto [logits, cache] = forward(cfg, p, x);
  CHECK(logits.size() == 3);
  CHECK(cache.hidden.rows() == 16);
  CHECK(cache.hidden.cols() == 296);
  CHECK((cache.hidden.array() >= 0).all());

  CHECK_THROWS_AS(forward(cfg, p, random_matrix(rng, 299, 140)), ShapeError);
  CHECK_THROWS_AS(forward(cfg, p, random_matrix(rng, 300, 136)), ShapeError);
}

TEST_CASE("forward with zero weights returns the output bias") {
  const auto cfg = small_config();
  auto p = Params<double>::zeros(cfg);
  p.fc2_b << 0.25, -1.5, 3.0;
  const auto [logits, cache] = forward(cfg, p, Matrix<double>::Zero(12, 6));
  CHECK(logits == p.fc2_b);
}

TEST_CASE("kernel as long as the input gives one output step") {
  auto cfg = small_config();
  cfg.kernel_size = cfg.input_length;
  Rng rng(2);
  const auto p = random_params(rng, cfg);
  const auto [logits, cache] = forward(cfg, p, random_matrix(rng, 12, 6));
  CHECK(cache.hidden.cols() == 1);
  cfg.kernel_size = 13;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("convolution matches a direct loop") {
  const auto cfg = small_config();
  Rng rng(4);
  const auto p = random_params(rng, cfg);
  const auto x = random_matrix(rng, 12, 6);
  const auto [logits, cache] = forward(cfg, p, x);
  for (int f = 0; f < cfg.conv_filters; ++f)
    for (int t = 0; t < cfg.conv_length(); ++t) {
      double acc = p.conv_b(f);
      for (int c = 0; c < cfg.input_channels; ++c)
        for (int j = 0; j < cfg.kernel_size; ++j) acc += p.conv(f, c, j, 6) * x(t + j, c);
      CHECK(cache.hidden(f, t) == doctest::Approx(std::max(acc, 0.0)).epsilon(1e-13));
    }
  // flatten order is filter-major
  Vector<double> flat(cfg.flat_size());
  for (int f = 0; f < cfg.conv_filters; ++f)
    for (int t = 0; t < cfg.conv_length(); ++t) flat(f * cfg.conv_length() + t) = cache.hidden(f, t);
  const Vector<double> expected = p.fc2_w * (p.fc1_w * flat + p.fc1_b) + p.fc2_b;
  CHECK(logits.isApprox(expected, 1e-13));
}

TEST_CASE("softmax cross entropy closed forms") {
  Vector<double> z(3);
  z << 0, 0, 0;
  for (int label = 0; label < 3; ++label)
    CHECK(softmax_cross_entropy(z, label).loss == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  const auto g = softmax_cross_entropy(z, 1).dlogits;
  CHECK(g(0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(g(1) == doctest::Approx(-2.0 / 3).epsilon(1e-15));
  CHECK(g(2) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  z << std::log(2.0), 0, 0;
  const auto p = softmax(z);
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(softmax_cross_entropy(z, 0).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  z << 1000, 0, -1000;  // no overflow
  CHECK(std::isfinite(softmax_cross_entropy(z, 2).loss));
  CHECK(softmax_cross_entropy(z, 2).loss == doctest::Approx(2000.0));
}

TEST_CASE("softmax properties over random logits") {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    Vector<double> z(3);
    for (int k = 0; k < 3; ++k) z(k) = rng.uniform(-15, 15);  // spread above ~37 rounds the top probability to 1.0
    const auto p = softmax(z);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    CHECK((p.array() > 0).all());
    CHECK((p.array() < 1).all());
    const auto lg = softmax_cross_entropy(z, int(rng.below(3)));
    CHECK(lg.loss >= 0);
    CHECK(std::abs(lg.dlogits.sum()) < 1e-12);
    const double shift = rng.uniform(-100, 100);
    CHECK(argmax(z) == argmax(Vector<double>(z.array() + shift)));
  }
  Vector<double> tie(3);
  tie << 1, 1, 0;
  CHECK(argmax(tie) == 0);
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(2024);
  SUBCASE("reference config D=6 T=12 F=2 k=3 H=4") {
    const auto cfg = small_config();
    const auto p = random_params(rng, cfg);
    const auto x = random_matrix(rng, 12, 6);
    const auto [logits, cache] = forward(cfg, p, x);
    const auto lg = softmax_cross_entropy(logits, 2);
    const auto grads = backward(cfg, p, cache, lg.dlogits);
    CHECK(max_gradient_rel_error(cfg, p, x, 2, grads) < 1e-4);
    CHECK(grads.fc2_b == lg.dlogits);
  }
  SUBCASE("random configs") {
    for (int trial = 0; trial < 6; ++trial) {
      ClassifierConfig cfg;
      cfg.input_channels = 1 + int(rng.below(7));
      cfg.input_length = 4 + int(rng.below(12));
      cfg.kernel_size = 1 + int(rng.below(4));
      cfg.conv_filters = 1 + int(rng.below(4));
      cfg.hidden_units = 1 + int(rng.below(6));
      const auto p = random_params(rng, cfg);
      const auto x = random_matrix(rng, cfg.input_length, cfg.input_channels);
      const int label = int(rng.below(3));
      const auto [logits, cache] = forward(cfg, p, x);
      const auto grads = backward(cfg, p, cache, softmax_cross_entropy(logits, label).dlogits);
      CHECK(max_gradient_rel_error(cfg, p, x, label, grads) < 1e-4);
    }
  }
}

TEST_CASE("backward edge cases") {
  const auto cfg = small_config();
  Rng rng(5);
  const auto p = random_params(rng, cfg);
  const auto [logits, cache] = forward(cfg, p, random_matrix(rng, 12, 6));
  const auto zero = backward(cfg, p, cache, Vector<double>(Vector<double>::Zero(3)));
  zero.visit([](const char*, const auto& t) { CHECK(t.isZero(0.0)); });
  CHECK_THROWS_AS(backward(cfg, p, cache, Vector<double>(Vector<double>::Zero(4))), ShapeError);
  auto other = cfg;
  other.hidden_units = 5;
  CHECK_THROWS_AS(backward(other, p, cache, Vector<double>(Vector<double>::Zero(3))), ShapeError);
}

TEST_CASE("output bias shifts logits exactly") {
  const auto cfg = small_config();
  Rng rng(7);
  auto p = random_params(rng, cfg);
  const auto x = random_matrix(rng, 12, 6);
  const auto before = forward(cfg, p, x).first;
  Vector<double> delta(3);
  delta << 0.5, -0.25, 2.0;
  p.fc2_b += delta;
  CHECK(forward(cfg, p, x).first == before + delta);
}

TEST_CASE("adam") {
  const auto cfg = small_config();
  Rng rng(9);
  const auto p0 = random_params(rng, cfg);

  SUBCASE("zero gradients leave everything unchanged") {
    const auto [p1, s1] = adam_step(p0, GradientSet<double>::zeros(cfg),
                                    AdamState<double>::zeros(cfg), 1e-3, 1);
    CHECK(p1 == p0);
    CHECK(s1 == AdamState<double>::zeros(cfg));
  }
  SUBCASE("first step moves each coordinate by lr * g / (|g| + eps)") {
    const auto g = random_params(rng, cfg);
    const double lr = 1e-3;
    const auto [p1, s1] = adam_step(p0, g, AdamState<double>::zeros(cfg), lr, 1);
    auto check = [&](const auto& before, const auto& after, const auto& grad) {
      for (Eigen::Index i = 0; i < before.size(); ++i) {
        const double gi = grad.data()[i];
        const double expected = before.data()[i] - lr * gi / (std::abs(gi) + kAdamEps);
        CHECK(after.data()[i] == doctest::Approx(expected).epsilon(1e-12));
        if (std::abs(gi) > 1e-3)
          CHECK(std::abs(after.data()[i] - before.data()[i]) == doctest::Approx(lr).epsilon(1e-4));
      }
    };
    check(p0.conv_w, p1.conv_w, g.conv_w);
    check(p0.fc1_w, p1.fc1_w, g.fc1_w);
    check(p0.fc2_b, p1.fc2_b, g.fc2_b);
    CHECK(s1.m.fc1_w.isApprox(0.1 * g.fc1_w));
  }
  SUBCASE("deterministic") {
    const auto g = random_params(rng, cfg);
    auto run = [&] {
      auto p = p0;
      auto s = AdamState<double>::zeros(cfg);
      for (int step = 1; step <= 5; ++step) adam_update(p, s, g, 1e-2, step);
      return p;
    };
    CHECK(run() == run());
  }
  SUBCASE("step must be positive") {
    auto p = p0;
    auto s = AdamState<double>::zeros(cfg);
    CHECK_THROWS_AS(adam_update(p, s, GradientSet<double>::zeros(cfg), 1e-3, 0), ConfigError);
  }
}
