#pragma once

#include "ratgan/layers.hpp"

#include <cstdint>

namespace ratgan {

// Fixed random conv stack standing in for a pretrained image encoder. The
// weights are drawn once from a seed and never trained; gradients flow
// through the stack (the penalty term needs them) but its tensors are not
// exposed to any optimizer. Three stride-2 convs, leaky_relu after each:
// 3 -> 16 -> 32 -> 64 channels, spatial extent halved per layer.
struct FrozenEncoder {
  Tensor w1, w2, w3;  // [16,3,3,3], [32,16,3,3], [64,32,3,3]
  uint64_t seed = 0;
  int out_channels() const { return 64; }
};

FrozenEncoder make_frozen_encoder(uint64_t seed);

// img [3,S,S] in [-1,1] -> features [64, S/8, S/8]; deterministic.
Tensor frozen_encode(const Tensor& img, const FrozenEncoder& enc);

// Trainable reduction of the frozen features to a compact map (plain conv so
// downstream heads see an unactivated linear feature).
struct FeExtractorWeights {
  Tensor conv_w;  // [C_e, 64, 3, 3]
  Tensor conv_b;  // [C_e]
};

Tensor fe_extract(const Tensor& feats, const FeExtractorWeights& w);

// Scores a (feature map, sentence) pair: the sentence is replicated over the
// spatial grid, channel-concatenated onto the features, pushed through two
// convs with a leaky_relu between, and sum-pooled to a scalar.
struct RefereeWeights {
  Tensor conv1_w, conv1_b;  // [C_r, C_e + d, 3, 3], [C_r]
  Tensor conv2_w, conv2_b;  // [1, C_r, 3, 3], [1]
};

Tensor referee_score(const Tensor& f, const Tensor& t, const RefereeWeights& w);

struct DiscriminatorConfig {
  int sentence_dim = 32;
  int fe_channels = 32;
  int referee_channels = 32;
  void validate() const;
};

struct DiscriminatorWeights {
  FeExtractorWeights fe;
  RefereeWeights referee;
};

DiscriminatorWeights make_discriminator_weights(const DiscriminatorConfig& cfg, Rng& rng);

// frozen_encode -> fe_extract -> referee_score, returning the scalar score.
Tensor discriminate(const Tensor& img, const Tensor& t, const FrozenEncoder& enc,
                    const DiscriminatorWeights& w);

// Trainable tensors only — the frozen encoder is deliberately absent.
ParamList discriminator_params(const DiscriminatorWeights& w);

}  // namespace ratgan
