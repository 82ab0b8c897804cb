#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratgan/discriminator.hpp"

#include "oracles.hpp"

#include <cmath>
#include <vector>

using namespace ratgan;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
  for (double& v : data) v = lo + (hi - lo) * rng.uniform();
  return Tensor::from_data(std::move(shape), std::move(data));
}

// Fixed random projection to a scalar so gradient checks can probe a
// tensor-valued function.
Tensor project(const Tensor& t, uint64_t seed) {
  Rng rng(seed);
  const int n = static_cast<int>(t.size());
  std::vector<double> p(static_cast<size_t>(n));
  for (double& v : p) v = rng.normal();
  return dot(reshape(t, {n}), Tensor::from_data({n}, std::move(p)));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

DiscriminatorConfig small_config() {
  DiscriminatorConfig cfg;
  cfg.sentence_dim = 6;
  cfg.fe_channels = 8;
  cfg.referee_channels = 8;
  return cfg;
}

}  // namespace

TEST_CASE("frozen encoder is deterministic and reproducible from its seed") {
  FrozenEncoder enc = make_frozen_encoder(42);
  Rng rng(1);
  Tensor img = random_tensor({3, 16, 16}, rng);

  Tensor f1 = frozen_encode(img, enc);
  Tensor f2 = frozen_encode(img, enc);
  CHECK(f1.shape() == std::vector<int>{64, 2, 2});
  CHECK(max_abs_diff(f1.data(), f2.data()) == 0.0);

  FrozenEncoder again = make_frozen_encoder(42);
  CHECK(max_abs_diff(enc.w1.data(), again.w1.data()) == 0.0);
  CHECK(max_abs_diff(enc.w2.data(), again.w2.data()) == 0.0);
  CHECK(max_abs_diff(enc.w3.data(), again.w3.data()) == 0.0);

  FrozenEncoder other = make_frozen_encoder(43);
  CHECK(max_abs_diff(enc.w1.data(), other.w1.data()) > 0.0);

  Tensor wide = frozen_encode(random_tensor({3, 32, 32}, rng), enc);
  CHECK(wide.shape() == std::vector<int>{64, 4, 4});
}

TEST_CASE("frozen encoder weights never enter the trainable set") {
  FrozenEncoder enc = make_frozen_encoder(7);
  CHECK_FALSE(enc.w1.requires_grad());
  CHECK_FALSE(enc.w2.requires_grad());
  CHECK_FALSE(enc.w3.requires_grad());
  Rng rng(2);
  DiscriminatorWeights w = make_discriminator_weights(small_config(), rng);
  for (const NamedParam& p : discriminator_params(w)) {
    CHECK(p.tensor.node() != enc.w1.node());
    CHECK(p.tensor.node() != enc.w2.node());
    CHECK(p.tensor.node() != enc.w3.node());
    CHECK(p.tensor.requires_grad());
  }
  CHECK(discriminator_params(w).size() == 6);
}

TEST_CASE("gradients flow through the frozen encoder") {
  FrozenEncoder enc = make_frozen_encoder(11);
  Rng rng(3);
  Tensor img = random_tensor({3, 16, 16}, rng);
  const double err = grad_check(
      [&](const Tensor& probe) { return project(frozen_encode(probe, enc), 99); }, img,
      1e-5);
  CHECK(err < 1e-4);
}

TEST_CASE("feature extraction is exactly a biased conv") {
  Rng rng(5);
  DiscriminatorConfig cfg = small_config();
  DiscriminatorWeights w = make_discriminator_weights(cfg, rng);
  Tensor feats = random_tensor({64, 2, 2}, rng);

  Tensor got = fe_extract(feats, w.fe);
  CHECK(got.shape() == std::vector<int>{cfg.fe_channels, 2, 2});

  std::vector<double> want = oracle::conv2d(feats.data(), 64, 2, 2, w.fe.conv_w.data(),
                                            cfg.fe_channels, 3, 3, 1, 1);
  for (int c = 0; c < cfg.fe_channels; ++c) {
    for (int i = 0; i < 4; ++i) {
      want[static_cast<size_t>(c) * 4 + i] += w.fe.conv_b.data()[static_cast<size_t>(c)];
    }
  }
  CHECK(max_abs_diff(got.data(), want) < 1e-12);

  for (double& v : w.fe.conv_w.mutable_data()) v = 0.0;
  Tensor zeroed = fe_extract(feats, w.fe);
  for (const double v : zeroed.data()) CHECK(v == 0.0);
}

TEST_CASE("referee score matches a hand-composed reference") {
  Rng rng(9);
  DiscriminatorConfig cfg = small_config();
  DiscriminatorWeights w = make_discriminator_weights(cfg, rng);
  const int h = 2, wd = 2;
  Tensor f = random_tensor({cfg.fe_channels, h, wd}, rng);
  Tensor t = random_tensor({cfg.sentence_dim}, rng);

  // Replicate the sentence over the grid and stack it under the features.
  std::vector<double> x = f.data();
  for (int c = 0; c < cfg.sentence_dim; ++c) {
    for (int i = 0; i < h * wd; ++i) x.push_back(t.data()[static_cast<size_t>(c)]);
  }
  const int cin = cfg.fe_channels + cfg.sentence_dim;
  std::vector<double> y1 = oracle::conv2d(x, cin, h, wd, w.referee.conv1_w.data(),
                                          cfg.referee_channels, 3, 3, 1, 1);
  for (int c = 0; c < cfg.referee_channels; ++c) {
    for (int i = 0; i < h * wd; ++i) {
      double& v = y1[static_cast<size_t>(c) * h * wd + i];
      v += w.referee.conv1_b.data()[static_cast<size_t>(c)];
      if (v < 0.0) v *= 0.2;
    }
  }
  std::vector<double> y2 =
      oracle::conv2d(y1, cfg.referee_channels, h, wd, w.referee.conv2_w.data(), 1, 3, 3,
                     1, 1);
  double want = 0.0;  // the bias lands once per output pixel before the sum-pool
  for (const double v : y2) want += v;
  want += w.referee.conv2_b.data()[0] * h * wd;

  Tensor got = referee_score(f, t, w.referee);
  CHECK(got.size() == 1);
  CHECK(got.value() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("referee zero weights score zero and the sentence matters") {
  Rng rng(13);
  DiscriminatorConfig cfg = small_config();
  Tensor f = random_tensor({cfg.fe_channels, 2, 2}, rng);

  DiscriminatorWeights zeroed = make_discriminator_weights(cfg, rng);
  for (Tensor* t : {&zeroed.referee.conv1_w, &zeroed.referee.conv1_b,
                    &zeroed.referee.conv2_w, &zeroed.referee.conv2_b}) {
    for (double& v : t->mutable_data()) v = 0.0;
  }
  CHECK(referee_score(f, random_tensor({cfg.sentence_dim}, rng), zeroed.referee).value() ==
        0.0);

  for (uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    Rng wrng(seed * 31);
    DiscriminatorWeights w = make_discriminator_weights(cfg, wrng);
    Tensor t1 = random_tensor({cfg.sentence_dim}, wrng);
    Tensor t2 = random_tensor({cfg.sentence_dim}, wrng);
    CHECK(referee_score(f, t1, w.referee).value() !=
          referee_score(f, t2, w.referee).value());
  }
}

TEST_CASE("referee rejects mismatched inputs") {
  Rng rng(17);
  DiscriminatorConfig cfg = small_config();
  DiscriminatorWeights w = make_discriminator_weights(cfg, rng);
  Tensor f = random_tensor({cfg.fe_channels, 2, 2}, rng);
  CHECK_THROWS_AS(
      referee_score(f, random_tensor({cfg.sentence_dim + 1}, rng), w.referee),
      ShapeError);
  CHECK_THROWS_AS(
      referee_score(random_tensor({cfg.fe_channels, 2}, rng),
                    random_tensor({cfg.sentence_dim}, rng), w.referee),
      ShapeError);
}

TEST_CASE("full discrimination is deterministic, finite, and differentiable") {
  FrozenEncoder enc = make_frozen_encoder(21);
  Rng rng(19);
  DiscriminatorConfig cfg = small_config();
  DiscriminatorWeights w = make_discriminator_weights(cfg, rng);
  Tensor img = random_tensor({3, 16, 16}, rng);
  Tensor t = random_tensor({cfg.sentence_dim}, rng);

  Tensor s1 = discriminate(img, t, enc, w);
  Tensor s2 = discriminate(img, t, enc, w);
  CHECK(s1.size() == 1);
  CHECK(std::isfinite(s1.value()));
  CHECK(s1.value() == s2.value());

  const double err = grad_check(
      [&](const Tensor& probe) { return discriminate(probe, t, enc, w); }, img, 1e-5);
  CHECK(err < 1e-3);
}
