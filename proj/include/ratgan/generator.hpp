#pragma once

#include "ratgan/conditioning.hpp"

#include <cstdint>

namespace ratgan {

enum class Conditioning { cat, rat };

// Where shuffle attention sits in the bridge. `none` drops it entirely (the
// ablation's middle arm); `per_pair` places one before the conv that follows
// every block pair; `after_first` places a single one right after block 0.
enum class SaPlacement { none, per_pair, after_first };

struct GeneratorConfig {
  int noise_dim = 16;      // dz
  int sentence_dim = 32;   // d
  int hidden_dim = 32;     // D; 0 removes per-block conditioning in rat mode
  int num_rat_blocks = 4;  // even; pairs beyond the upsampling need run at full size
  int base_channels = 64;
  int image_size = 32;  // in {16, 32, 64}
  int sa_groups = 2;
  Conditioning conditioning = Conditioning::rat;
  SaPlacement sa_placement = SaPlacement::per_pair;

  int pairs() const { return num_rat_blocks / 2; }
  int bridge_size() const { return image_size / 2; }
  int sa_count() const;
  // Throws ConfigError when any invariant fails.
  void validate() const;
};

// Bridge blocks come in three flavors: conditioned recurrently (rat),
// conditioned statically (cat), or bare conv (plain — the hidden_dim=0 arm).
enum class BlockKind { plain, cat, rat };
BlockKind block_kind(const GeneratorConfig& cfg);

struct PlainBlockWeights {
  Tensor conv_w, conv_b;
};

struct GeneratorWeights {
  Mlp seed;  // dz -> base_channels*4*4, single layer
  // Recurrent conditioning (rat with hidden_dim > 0 only).
  Mlp h0, c0;
  LstmWeights lstm;
  // Exactly one of these vectors is populated, per block_kind.
  std::vector<RatBlockWeights> rat_blocks;
  std::vector<CatBlockWeights> cat_blocks;
  std::vector<PlainBlockWeights> plain_blocks;
  // One per placement slot (pairs for per_pair, 1 for after_first, else 0).
  std::vector<ShuffleAttentionWeights> sa;
  // Conv closing every pair.
  std::vector<Tensor> pair_conv_w, pair_conv_b;
  // Image decoder: one static conditioning block from (z; T), then to-RGB.
  CatBlockWeights decoder;
  Tensor to_rgb_w, to_rgb_b;
};

GeneratorWeights make_generator_weights(const GeneratorConfig& cfg, Rng& rng);

// Seed feature -> conditioned block pairs -> bridge feature [C, S/2, S/2].
Tensor rat_bridge_forward(const Tensor& z, const Tensor& t, const GeneratorWeights& w,
                          const GeneratorConfig& cfg);

// Bridge feature -> RGB image in [-1,1], shape [3, S, S].
Tensor image_g_forward(const Tensor& f, const Tensor& z, const Tensor& t,
                       const GeneratorWeights& w);

Tensor generate(const Tensor& z, const Tensor& t, const GeneratorWeights& w,
                const GeneratorConfig& cfg);

ParamList generator_params(const GeneratorWeights& w);
int64_t count_parameters(const GeneratorWeights& w);

}  // namespace ratgan
