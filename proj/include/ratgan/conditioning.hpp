#pragma once

#include "ratgan/layers.hpp"

#include <utility>

namespace ratgan {

// Per-channel scale and shift applied to a feature map.
struct AffineParams {
  Tensor gamma;  // [C]
  Tensor beta;   // [C]
};

struct LstmState {
  Tensor h;  // [D]
  Tensor c;  // [D]
};

struct LstmWeights {
  Tensor w;  // [4D, d+D], gate rows ordered [i, f, o, u]
  Tensor b;  // [4D]
};

struct GateActivations {
  Tensor i, f, o, u;  // each [D]
};

// Two per-block predictors mapping a conditioning vector to gamma and beta.
struct AffinePredictor {
  Mlp gamma;
  Mlp beta;
};

struct RatBlockWeights {
  AffinePredictor predictor;  // single-layer maps from the LSTM hidden state
  Tensor conv_w;              // [C, C, 3, 3]
  Tensor conv_b;              // [C]
};

struct CatBlockWeights {
  AffinePredictor predictor;  // two-layer maps from the sentence vector
  Tensor conv_w;
  Tensor conv_b;
};

struct ShuffleAttentionWeights {
  Tensor channel_scale, channel_shift;  // [C/(2*groups)], shared across groups
  Tensor spatial_scale, spatial_shift;  // [C/(2*groups)]
};

// h0 = MLP(z), c0 = MLP(z), each its own single-layer map.
LstmState lstm_init(const Tensor& z, const Mlp& h0_mlp, const Mlp& c0_mlp);

// One recurrence step driven by the concatenation (s; h_prev).
std::pair<LstmState, GateActivations> lstm_step(const LstmState& prev, const Tensor& s,
                                                const LstmWeights& w);

AffineParams predict_affine(const Tensor& h, const AffinePredictor& w);

// out[ch,y,x] = gamma[ch] * c[ch,y,x] + beta[ch]
Tensor affine_modulate(const Tensor& c, const AffineParams& p);

// Recurrent block: advance the LSTM, modulate with params predicted from the
// new hidden state, then leaky_relu and a same-padding 3x3 conv. The advanced
// state is returned so it threads through the whole block stack.
std::pair<Tensor, LstmState> rat_block_forward(const Tensor& x, const LstmState& state,
                                               const Tensor& s, const LstmWeights& lstm,
                                               const RatBlockWeights& w);

// Stateless baseline block: params predicted from the sentence vector alone.
Tensor cat_block_forward(const Tensor& x, const Tensor& s, const CatBlockWeights& w);

// Grouped dual-branch gating followed by a terminal channel shuffle.
Tensor shuffle_attention_forward(const Tensor& x, int groups,
                                 const ShuffleAttentionWeights& w);

// Weight constructors (N(0, 0.02^2) matrices, zero biases unless stated).
LstmWeights make_lstm_weights(int d, int hidden, Rng& rng);  // forget bias +1
RatBlockWeights make_rat_block_weights(int hidden, int channels, Rng& rng);
CatBlockWeights make_cat_block_weights(int sentence_dim, int channels, Rng& rng);
ShuffleAttentionWeights make_shuffle_attention_weights(int channels, int groups);

void append_params(const LstmWeights& w, const std::string& prefix, ParamList& out);
void append_params(const AffinePredictor& w, const std::string& prefix, ParamList& out);
void append_params(const RatBlockWeights& w, const std::string& prefix, ParamList& out);
void append_params(const CatBlockWeights& w, const std::string& prefix, ParamList& out);
void append_params(const ShuffleAttentionWeights& w, const std::string& prefix,
                   ParamList& out);

}  // namespace ratgan
