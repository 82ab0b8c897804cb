#include "ratgan/generator.hpp"

namespace ratgan {

namespace {

constexpr int kSeedSize = 4;  // spatial extent of the seed feature

int int_log2(int v) {
  int r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

}  // namespace

int GeneratorConfig::sa_count() const {
  switch (sa_placement) {
    case SaPlacement::none:
      return 0;
    case SaPlacement::per_pair:
      return pairs();
    case SaPlacement::after_first:
      return 1;
  }
  return 0;
}

void GeneratorConfig::validate() const {
  if (noise_dim < 1) throw ConfigError("generator: noise_dim must be >= 1");
  if (sentence_dim < 1) throw ConfigError("generator: sentence_dim must be >= 1");
  if (hidden_dim < 0) throw ConfigError("generator: hidden_dim must be >= 0");
  if (image_size != 16 && image_size != 32 && image_size != 64) {
    throw ConfigError("generator: image_size must be one of 16, 32, 64, got " +
                      std::to_string(image_size));
  }
  if (num_rat_blocks < 2 || num_rat_blocks % 2 != 0) {
    throw ConfigError("generator: num_rat_blocks must be even and >= 2, got " +
                      std::to_string(num_rat_blocks));
  }
  if (base_channels < 1) throw ConfigError("generator: base_channels must be >= 1");
  if (sa_groups < 1 || base_channels % (2 * sa_groups) != 0) {
    throw ConfigError("generator: base_channels (" + std::to_string(base_channels) +
                      ") must be divisible by 2*sa_groups (" + std::to_string(sa_groups) +
                      ")");
  }
  // The bridge doubles resolution once per pair starting from the 4x4 seed;
  // it needs enough pairs to reach image_size/2.
  const int ups_needed = int_log2(bridge_size() / kSeedSize);
  if (pairs() < ups_needed) {
    throw ConfigError("generator: " + std::to_string(num_rat_blocks) +
                      " blocks cannot upsample the seed to " +
                      std::to_string(bridge_size()) + "x" + std::to_string(bridge_size()));
  }
}

BlockKind block_kind(const GeneratorConfig& cfg) {
  if (cfg.conditioning == Conditioning::cat) return BlockKind::cat;
  return cfg.hidden_dim > 0 ? BlockKind::rat : BlockKind::plain;
}

GeneratorWeights make_generator_weights(const GeneratorConfig& cfg, Rng& rng) {
  cfg.validate();
  const int c = cfg.base_channels;
  GeneratorWeights w;
  w.seed = make_mlp1(c * kSeedSize * kSeedSize, cfg.noise_dim, rng);

  const BlockKind kind = block_kind(cfg);
  if (kind == BlockKind::rat) {
    w.h0 = make_mlp1(cfg.hidden_dim, cfg.noise_dim, rng);
    w.c0 = make_mlp1(cfg.hidden_dim, cfg.noise_dim, rng);
    w.lstm = make_lstm_weights(cfg.sentence_dim, cfg.hidden_dim, rng);
  }
  for (int b = 0; b < cfg.num_rat_blocks; ++b) {
    switch (kind) {
      case BlockKind::rat:
        w.rat_blocks.push_back(make_rat_block_weights(cfg.hidden_dim, c, rng));
        break;
      case BlockKind::cat:
        w.cat_blocks.push_back(make_cat_block_weights(cfg.sentence_dim, c, rng));
        break;
      case BlockKind::plain:
        w.plain_blocks.push_back(
            PlainBlockWeights{make_conv_weight(c, c, 3, rng), make_bias(c)});
        break;
    }
  }
  for (int i = 0; i < cfg.sa_count(); ++i) {
    w.sa.push_back(make_shuffle_attention_weights(c, cfg.sa_groups));
  }
  for (int p = 0; p < cfg.pairs(); ++p) {
    w.pair_conv_w.push_back(make_conv_weight(c, c, 3, rng));
    w.pair_conv_b.push_back(make_bias(c));
  }
  w.decoder = make_cat_block_weights(cfg.noise_dim + cfg.sentence_dim, c, rng);
  w.to_rgb_w = make_conv_weight(3, c, 3, rng);
  w.to_rgb_b = make_bias(3);
  return w;
}

namespace {

void check_weights_match(const GeneratorWeights& w, const GeneratorConfig& cfg) {
  const BlockKind kind = block_kind(cfg);
  const size_t blocks = static_cast<size_t>(cfg.num_rat_blocks);
  const bool sized_ok =
      (kind == BlockKind::rat ? w.rat_blocks.size() == blocks
                              : kind == BlockKind::cat ? w.cat_blocks.size() == blocks
                                                       : w.plain_blocks.size() == blocks) &&
      w.sa.size() == static_cast<size_t>(cfg.sa_count()) &&
      w.pair_conv_w.size() == static_cast<size_t>(cfg.pairs()) &&
      w.pair_conv_b.size() == static_cast<size_t>(cfg.pairs());
  if (!sized_ok) {
    throw ConfigError("generator: weight layout does not match the config");
  }
}

}  // namespace

Tensor rat_bridge_forward(const Tensor& z, const Tensor& t, const GeneratorWeights& w,
                          const GeneratorConfig& cfg) {
  cfg.validate();
  check_weights_match(w, cfg);
  const int c = cfg.base_channels;
  const BlockKind kind = block_kind(cfg);

  Tensor x = reshape(mlp_forward(z, w.seed), {c, kSeedSize, kSeedSize});
  LstmState state;
  if (kind == BlockKind::rat) state = lstm_init(z, w.h0, w.c0);

  int size = kSeedSize;
  for (int p = 0; p < cfg.pairs(); ++p) {
    for (int half = 0; half < 2; ++half) {
      const int b = 2 * p + half;
      switch (kind) {
        case BlockKind::rat: {
          auto [y, next] = rat_block_forward(x, state, t, w.lstm, w.rat_blocks[b]);
          x = y;
          state = next;
          break;
        }
        case BlockKind::cat:
          x = cat_block_forward(x, t, w.cat_blocks[b]);
          break;
        case BlockKind::plain:
          x = conv2d_bias(leaky_relu(x), w.plain_blocks[b].conv_w,
                          w.plain_blocks[b].conv_b, 1, 1);
          break;
      }
      if (cfg.sa_placement == SaPlacement::after_first && b == 0) {
        x = shuffle_attention_forward(x, cfg.sa_groups, w.sa[0]);
      }
    }
    if (cfg.sa_placement == SaPlacement::per_pair) {
      x = shuffle_attention_forward(x, cfg.sa_groups, w.sa[p]);
    }
    x = conv2d_bias(x, w.pair_conv_w[p], w.pair_conv_b[p], 1, 1);
    if (size < cfg.bridge_size()) {
      x = nearest_upsample(x, 2);
      size *= 2;
    }
  }
  return x;
}

Tensor image_g_forward(const Tensor& f, const Tensor& z, const Tensor& t,
                       const GeneratorWeights& w) {
  Tensor y = cat_block_forward(f, concat(z, t), w.decoder);
  y = leaky_relu(nearest_upsample(y, 2));
  y = conv2d_bias(y, w.to_rgb_w, w.to_rgb_b, 1, 1);
  return tanh_act(y);
}

Tensor generate(const Tensor& z, const Tensor& t, const GeneratorWeights& w,
                const GeneratorConfig& cfg) {
  return image_g_forward(rat_bridge_forward(z, t, w, cfg), z, t, w);
}

ParamList generator_params(const GeneratorWeights& w) {
  ParamList out;
  append_params(w.seed, "gen.seed", out);
  if (w.h0.l1.w.defined()) {
    append_params(w.h0, "gen.h0", out);
    append_params(w.c0, "gen.c0", out);
    append_params(w.lstm, "gen.lstm", out);
  }
  for (size_t b = 0; b < w.rat_blocks.size(); ++b) {
    append_params(w.rat_blocks[b], "gen.block" + std::to_string(b), out);
  }
  for (size_t b = 0; b < w.cat_blocks.size(); ++b) {
    append_params(w.cat_blocks[b], "gen.block" + std::to_string(b), out);
  }
  for (size_t b = 0; b < w.plain_blocks.size(); ++b) {
    const std::string prefix = "gen.block" + std::to_string(b);
    out.push_back({prefix + ".conv.w", w.plain_blocks[b].conv_w});
    out.push_back({prefix + ".conv.b", w.plain_blocks[b].conv_b});
  }
  for (size_t i = 0; i < w.sa.size(); ++i) {
    append_params(w.sa[i], "gen.sa" + std::to_string(i), out);
  }
  for (size_t p = 0; p < w.pair_conv_w.size(); ++p) {
    out.push_back({"gen.pair" + std::to_string(p) + ".conv.w", w.pair_conv_w[p]});
    out.push_back({"gen.pair" + std::to_string(p) + ".conv.b", w.pair_conv_b[p]});
  }
  if (w.decoder.conv_w.defined()) append_params(w.decoder, "gen.decoder", out);
  if (w.to_rgb_w.defined()) {
    out.push_back({"gen.to_rgb.w", w.to_rgb_w});
    out.push_back({"gen.to_rgb.b", w.to_rgb_b});
  }
  return out;
}

int64_t count_parameters(const GeneratorWeights& w) {
  int64_t total = 0;
  for (const NamedParam& p : generator_params(w)) total += p.tensor.size();
  return total;
}

}  // namespace ratgan
