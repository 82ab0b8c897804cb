#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratgan/generator.hpp"

#include <cmath>
#include <vector>

using namespace ratgan;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
  for (double& v : data) v = lo + (hi - lo) * rng.uniform();
  return Tensor::from_data(std::move(shape), std::move(data));
}

GeneratorConfig small_config() {
  GeneratorConfig cfg;
  cfg.noise_dim = 4;
  cfg.sentence_dim = 6;
  cfg.hidden_dim = 5;
  cfg.num_rat_blocks = 2;
  cfg.base_channels = 8;
  cfg.image_size = 16;
  cfg.sa_groups = 2;
  return cfg;
}

// Multiply every trainable tensor by `factor`. Gradient checks probe with
// O(1)-scale weights; the 0.02 training init parks activations inside a
// finite-difference step of the leaky_relu kink.
void inflate(GeneratorWeights& w, double factor) {
  for (NamedParam& p : generator_params(w)) {
    for (double& v : p.tensor.mutable_data()) v *= factor;
  }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("bridge output shape follows the config for all valid settings") {
  for (const int image_size : {16, 32}) {
    for (const Conditioning mode : {Conditioning::cat, Conditioning::rat}) {
      for (const SaPlacement placement :
           {SaPlacement::none, SaPlacement::per_pair, SaPlacement::after_first}) {
        GeneratorConfig cfg = small_config();
        cfg.image_size = image_size;
        cfg.num_rat_blocks = image_size == 16 ? 2 : 4;
        cfg.conditioning = mode;
        cfg.sa_placement = placement;
        CAPTURE(image_size);
        CAPTURE(static_cast<int>(mode));
        CAPTURE(static_cast<int>(placement));
        Rng rng(7);
        GeneratorWeights w = make_generator_weights(cfg, rng);
        Tensor z = random_tensor({cfg.noise_dim}, rng);
        Tensor t = random_tensor({cfg.sentence_dim}, rng);
        Tensor f = rat_bridge_forward(z, t, w, cfg);
        CHECK(f.shape() == std::vector<int>{cfg.base_channels, cfg.bridge_size(),
                                            cfg.bridge_size()});
      }
    }
  }
}

TEST_CASE("hidden_dim zero drops conditioning from the bridge blocks") {
  GeneratorConfig cfg = small_config();
  cfg.hidden_dim = 0;
  Rng rng(11);
  GeneratorWeights w = make_generator_weights(cfg, rng);
  CHECK(w.plain_blocks.size() == 2);
  CHECK(w.rat_blocks.empty());
  CHECK_FALSE(w.h0.l1.w.defined());
  Tensor z = random_tensor({cfg.noise_dim}, rng);
  Tensor t1 = random_tensor({cfg.sentence_dim}, rng);
  Tensor t2 = random_tensor({cfg.sentence_dim}, rng);
  // The bridge ignores the sentence entirely; only the decoder conditions.
  CHECK(max_abs_diff(rat_bridge_forward(z, t1, w, cfg).data(),
                     rat_bridge_forward(z, t2, w, cfg).data()) == 0.0);
}

TEST_CASE("bridge forward is pure") {
  GeneratorConfig cfg = small_config();
  Rng rng(13);
  GeneratorWeights w = make_generator_weights(cfg, rng);
  Tensor z = random_tensor({cfg.noise_dim}, rng);
  Tensor t = random_tensor({cfg.sentence_dim}, rng);
  Tensor a = rat_bridge_forward(z, t, w, cfg);
  Tensor b = rat_bridge_forward(z, t, w, cfg);
  CHECK(max_abs_diff(a.data(), b.data()) == 0.0);
}

TEST_CASE("neutralized conditioning reduces the bridge to its conv path") {
  GeneratorConfig cfg = small_config();
  Rng rng(17);
  GeneratorWeights w = make_generator_weights(cfg, rng);
  // Zero all conditioning weights, then set each gamma bias to one: the
  // modulation becomes the identity and the text path goes dead.
  for (Tensor* t : {&w.h0.l1.w, &w.h0.l1.b, &w.c0.l1.w, &w.c0.l1.b, &w.lstm.w, &w.lstm.b}) {
    for (double& v : t->mutable_data()) v = 0.0;
  }
  for (RatBlockWeights& blk : w.rat_blocks) {
    for (Tensor* t : {&blk.predictor.gamma.l1.w, &blk.predictor.gamma.l1.b,
                      &blk.predictor.beta.l1.w, &blk.predictor.beta.l1.b}) {
      for (double& v : t->mutable_data()) v = 0.0;
    }
    for (double& v : blk.predictor.gamma.l1.b.mutable_data()) v = 1.0;
  }

  Tensor z = random_tensor({cfg.noise_dim}, rng);
  Tensor t1 = random_tensor({cfg.sentence_dim}, rng);
  Tensor t2 = random_tensor({cfg.sentence_dim}, rng);
  Tensor got = rat_bridge_forward(z, t1, w, cfg);

  // Hand-composed unconditioned path over the same weights.
  Tensor x = reshape(mlp_forward(z, w.seed), {cfg.base_channels, 4, 4});
  x = conv2d_bias(leaky_relu(x), w.rat_blocks[0].conv_w, w.rat_blocks[0].conv_b, 1, 1);
  x = conv2d_bias(leaky_relu(x), w.rat_blocks[1].conv_w, w.rat_blocks[1].conv_b, 1, 1);
  x = shuffle_attention_forward(x, cfg.sa_groups, w.sa[0]);
  x = conv2d_bias(x, w.pair_conv_w[0], w.pair_conv_b[0], 1, 1);
  x = nearest_upsample(x, 2);

  CHECK(max_abs_diff(got.data(), x.data()) == 0.0);
  CHECK(max_abs_diff(got.data(), rat_bridge_forward(z, t2, w, cfg).data()) == 0.0);
}

TEST_CASE("decoder output is a bounded RGB image") {
  GeneratorConfig cfg = small_config();
  Rng rng(19);
  GeneratorWeights w = make_generator_weights(cfg, rng);
  inflate(w, 30.0);  // push tanh toward its rails to exercise the bound
  Tensor z = random_tensor({cfg.noise_dim}, rng);
  Tensor t = random_tensor({cfg.sentence_dim}, rng);
  Tensor img = generate(z, t, w, cfg);
  CHECK(img.shape() == std::vector<int>{3, cfg.image_size, cfg.image_size});
  for (const double v : img.data()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }

  for (double& v : w.to_rgb_w.mutable_data()) v = 0.0;
  for (double& v : w.to_rgb_b.mutable_data()) v = 0.0;
  Tensor blank = generate(z, t, w, cfg);
  for (const double v : blank.data()) CHECK(v == 0.0);
}

TEST_CASE("generate is deterministic and differentiable in the noise") {
  GeneratorConfig cfg = small_config();
  Rng rng(23);
  GeneratorWeights w = make_generator_weights(cfg, rng);
  inflate(w, 10.0);  // large enough to clear the kink, small enough that tanh stays live
  Tensor z = random_tensor({cfg.noise_dim}, rng);
  Tensor t = random_tensor({cfg.sentence_dim}, rng);
  CHECK(max_abs_diff(generate(z, t, w, cfg).data(), generate(z, t, w, cfg).data()) == 0.0);

  const double err = grad_check(
      [&](const Tensor& probe) { return mean(generate(probe, t, w, cfg)); }, z, 1e-5);
  CHECK(err < 1e-3);
}

TEST_CASE("changing the sentence changes the image") {
  GeneratorConfig cfg = small_config();
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    Rng rng(seed * 101);
    GeneratorWeights w = make_generator_weights(cfg, rng);
    Tensor z = random_tensor({cfg.noise_dim}, rng);
    Tensor t1 = random_tensor({cfg.sentence_dim}, rng);
    Tensor t2 = random_tensor({cfg.sentence_dim}, rng);
    CHECK(max_abs_diff(generate(z, t1, w, cfg).data(), generate(z, t2, w, cfg).data()) >
          0.0);
  }
}

TEST_CASE("parameter count: degenerate, monotone, and exact cases") {
  SUBCASE("weights holding only the seed count only the seed") {
    Rng rng(29);
    GeneratorWeights w;
    w.seed = make_mlp1(12, 4, rng);
    CHECK(count_parameters(w) == 12 * 4 + 12);
  }
  SUBCASE("count grows strictly with the hidden dimension") {
    int64_t prev = -1;
    for (const int hidden : {0, 4, 8, 16}) {
      GeneratorConfig cfg = small_config();
      cfg.hidden_dim = hidden;
      Rng rng(31);
      const int64_t n = count_parameters(make_generator_weights(cfg, rng));
      CAPTURE(hidden);
      CHECK(n > prev);
      prev = n;
    }
  }
  SUBCASE("exact count for one fixed config matches an independent shape sum") {
    GeneratorConfig cfg = small_config();  // dz=4 d=6 D=5 blocks=2 C=8 S=16 g=2
    Rng rng(37);
    const int64_t got = count_parameters(make_generator_weights(cfg, rng));
    // Independent sum, written out shape by shape.
    const int64_t seed = (8 * 4 * 4) * 4 + 8 * 4 * 4;         // 128x4 + 128
    const int64_t init = 2 * (5 * 4 + 5);                     // h0 and c0 maps
    const int64_t lstm = (4 * 5) * (6 + 5) + 4 * 5;           // gates + bias
    const int64_t predictors = 2 * 2 * (8 * 5 + 8);           // 2 blocks x (gamma, beta)
    const int64_t block_convs = 2 * (8 * 8 * 3 * 3 + 8);      // per-block 3x3
    const int64_t sa = 4 * (8 / (2 * 2));                     // four branch vectors
    const int64_t pair_conv = 8 * 8 * 3 * 3 + 8;
    const int64_t decoder_mlps = 2 * ((10 * 10 + 10) + (8 * 10 + 8));
    const int64_t decoder_conv = 8 * 8 * 3 * 3 + 8;
    const int64_t to_rgb = 3 * 8 * 3 * 3 + 3;
    CHECK(got == seed + init + lstm + predictors + block_convs + sa + pair_conv +
                     decoder_mlps + decoder_conv + to_rgb);
  }
}

TEST_CASE("config validation rejects bad settings") {
  GeneratorConfig cfg = small_config();
  cfg.image_size = 24;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.num_rat_blocks = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.base_channels = 6;  // not divisible by 2*sa_groups = 4
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.image_size = 64;
  cfg.num_rat_blocks = 4;  // needs 3 pairs to reach 32x32
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
}
