#include "ratgan/discriminator.hpp"

namespace ratgan {

namespace {

constexpr double kFrozenStddev = 0.05;

Tensor frozen_conv_weight(int cout, int cin, Rng& rng) {
  std::vector<double> data(static_cast<size_t>(cout) * cin * 9);
  for (double& v : data) v = rng.normal(0.0, kFrozenStddev);
  return Tensor::from_data({cout, cin, 3, 3}, std::move(data));
}

}  // namespace

FrozenEncoder make_frozen_encoder(uint64_t seed) {
  Rng rng(seed);
  FrozenEncoder enc;
  enc.w1 = frozen_conv_weight(16, 3, rng);
  enc.w2 = frozen_conv_weight(32, 16, rng);
  enc.w3 = frozen_conv_weight(64, 32, rng);
  enc.seed = seed;
  return enc;
}

Tensor frozen_encode(const Tensor& img, const FrozenEncoder& enc) {
  Tensor x = leaky_relu(conv2d(img, enc.w1, 2, 1));
  x = leaky_relu(conv2d(x, enc.w2, 2, 1));
  return leaky_relu(conv2d(x, enc.w3, 2, 1));
}

Tensor fe_extract(const Tensor& feats, const FeExtractorWeights& w) {
  return conv2d_bias(feats, w.conv_w, w.conv_b, 1, 1);
}

Tensor referee_score(const Tensor& f, const Tensor& t, const RefereeWeights& w) {
  if (f.rank() != 3) {
    throw ShapeError("referee_score: feature map must be rank 3, got " + f.shape_str());
  }
  if (t.rank() != 1) {
    throw ShapeError("referee_score: sentence must be rank 1, got " + t.shape_str());
  }
  const int h = f.shape()[1];
  const int ww = f.shape()[2];
  Tensor x = concat(f, broadcast_spatial(t, h, ww));
  x = leaky_relu(conv2d_bias(x, w.conv1_w, w.conv1_b, 1, 1));
  x = conv2d_bias(x, w.conv2_w, w.conv2_b, 1, 1);
  return sum(x);
}

void DiscriminatorConfig::validate() const {
  if (sentence_dim < 1) throw ConfigError("discriminator: sentence_dim must be >= 1");
  if (fe_channels < 1) throw ConfigError("discriminator: fe_channels must be >= 1");
  if (referee_channels < 1) {
    throw ConfigError("discriminator: referee_channels must be >= 1");
  }
}

DiscriminatorWeights make_discriminator_weights(const DiscriminatorConfig& cfg,
                                                Rng& rng) {
  cfg.validate();
  DiscriminatorWeights w;
  w.fe.conv_w = make_conv_weight(cfg.fe_channels, 64, 3, rng);
  w.fe.conv_b = make_bias(cfg.fe_channels);
  w.referee.conv1_w =
      make_conv_weight(cfg.referee_channels, cfg.fe_channels + cfg.sentence_dim, 3, rng);
  w.referee.conv1_b = make_bias(cfg.referee_channels);
  w.referee.conv2_w = make_conv_weight(1, cfg.referee_channels, 3, rng);
  w.referee.conv2_b = make_bias(1);
  return w;
}

Tensor discriminate(const Tensor& img, const Tensor& t, const FrozenEncoder& enc,
                    const DiscriminatorWeights& w) {
  return referee_score(fe_extract(frozen_encode(img, enc), w.fe), t, w.referee);
}

ParamList discriminator_params(const DiscriminatorWeights& w) {
  ParamList out;
  out.push_back({"disc.fe.conv.w", w.fe.conv_w});
  out.push_back({"disc.fe.conv.b", w.fe.conv_b});
  out.push_back({"disc.referee.conv1.w", w.referee.conv1_w});
  out.push_back({"disc.referee.conv1.b", w.referee.conv1_b});
  out.push_back({"disc.referee.conv2.w", w.referee.conv2_w});
  out.push_back({"disc.referee.conv2.b", w.referee.conv2_b});
  return out;
}

}  // namespace ratgan
