#include "ratgan/conditioning.hpp"

namespace ratgan {

namespace {

// eps for the normalization inside shuffle attention's spatial branch.
constexpr double kSaNormEps = 1e-5;

}  // namespace

LstmState lstm_init(const Tensor& z, const Mlp& h0_mlp, const Mlp& c0_mlp) {
  return LstmState{mlp_forward(z, h0_mlp), mlp_forward(z, c0_mlp)};
}

std::pair<LstmState, GateActivations> lstm_step(const LstmState& prev, const Tensor& s,
                                                const LstmWeights& w) {
  if (w.w.rank() != 2 || w.w.shape()[0] % 4 != 0) {
    throw ShapeError("lstm_step: gate matrix must be [4D, d+D], got " + w.w.shape_str());
  }
  const int hidden = w.w.shape()[0] / 4;
  if (prev.h.rank() != 1 || prev.h.shape()[0] != hidden || !prev.h.same_shape(prev.c)) {
    throw ShapeError("lstm_step: state dims disagree with gate matrix " + w.w.shape_str());
  }
  if (s.rank() != 1 || s.shape()[0] + hidden != w.w.shape()[1]) {
    throw ShapeError("lstm_step: sentence " + s.shape_str() + " plus hidden " +
                     std::to_string(hidden) + " does not match gate matrix " +
                     w.w.shape_str());
  }
  if (w.b.rank() != 1 || w.b.shape()[0] != 4 * hidden) {
    throw ShapeError("lstm_step: bias " + w.b.shape_str() + " must be [4D]");
  }

  Tensor x = concat(s, prev.h);
  Tensor pre = add(reshape(matmul(w.w, reshape(x, {x.shape()[0], 1})), {4 * hidden}), w.b);
  GateActivations gates;
  gates.i = sigmoid(slice(pre, 0, hidden));
  gates.f = sigmoid(slice(pre, hidden, 2 * hidden));
  gates.o = sigmoid(slice(pre, 2 * hidden, 3 * hidden));
  gates.u = tanh_act(slice(pre, 3 * hidden, 4 * hidden));

  LstmState next;
  next.c = add(mul(gates.f, prev.c), mul(gates.i, gates.u));
  next.h = mul(gates.o, tanh_act(next.c));
  return {next, gates};
}

AffineParams predict_affine(const Tensor& h, const AffinePredictor& w) {
  return AffineParams{mlp_forward(h, w.gamma), mlp_forward(h, w.beta)};
}

Tensor affine_modulate(const Tensor& c, const AffineParams& p) {
  if (c.rank() != 3) {
    throw ShapeError("affine_modulate: expected [C,H,W], got " + c.shape_str());
  }
  if (p.gamma.rank() != 1 || !p.gamma.same_shape(p.beta) ||
      p.gamma.shape()[0] != c.shape()[0]) {
    throw ShapeError("affine_modulate: params " + p.gamma.shape_str() +
                     " do not match channels of " + c.shape_str());
  }
  const int h = c.shape()[1], w = c.shape()[2];
  return add(mul(c, broadcast_spatial(p.gamma, h, w)), broadcast_spatial(p.beta, h, w));
}

std::pair<Tensor, LstmState> rat_block_forward(const Tensor& x, const LstmState& state,
                                               const Tensor& s, const LstmWeights& lstm,
                                               const RatBlockWeights& w) {
  auto [next, gates] = lstm_step(state, s, lstm);
  (void)gates;
  Tensor y = affine_modulate(x, predict_affine(next.h, w.predictor));
  y = conv2d_bias(leaky_relu(y), w.conv_w, w.conv_b, 1, 1);
  return {y, next};
}

Tensor cat_block_forward(const Tensor& x, const Tensor& s, const CatBlockWeights& w) {
  Tensor y = affine_modulate(x, predict_affine(s, w.predictor));
  return conv2d_bias(leaky_relu(y), w.conv_w, w.conv_b, 1, 1);
}

Tensor shuffle_attention_forward(const Tensor& x, int groups,
                                 const ShuffleAttentionWeights& w) {
  if (x.rank() != 3) {
    throw ShapeError("shuffle_attention: expected [C,H,W], got " + x.shape_str());
  }
  const int c = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
  if (groups < 1 || c % (2 * groups) != 0) {
    throw ConfigError("shuffle_attention: " + std::to_string(c) +
                      " channels not divisible by 2*" + std::to_string(groups) +
                      " groups");
  }
  const int per = c / groups;
  const int half = per / 2;
  if (w.channel_scale.rank() != 1 || w.channel_scale.shape()[0] != half ||
      !w.channel_scale.same_shape(w.channel_shift) ||
      !w.channel_scale.same_shape(w.spatial_scale) ||
      !w.channel_scale.same_shape(w.spatial_shift)) {
    throw ShapeError("shuffle_attention: branch params must all be [C/(2*groups)]");
  }

  Tensor out;
  for (int g = 0; g < groups; ++g) {
    Tensor xc = slice(x, g * per, g * per + half);
    Tensor xs = slice(x, g * per + half, (g + 1) * per);

    // Channel branch: gate each channel by a squeezed global statistic.
    Tensor gap = global_avg_pool(xc);
    Tensor gate_c = sigmoid(add(mul(w.channel_scale, gap), w.channel_shift));
    Tensor yc = mul(xc, broadcast_spatial(gate_c, h, wd));

    // Spatial branch: gate each pixel by its normalized response.
    Tensor gn = group_norm(xs, half, kSaNormEps);
    Tensor gate_s = sigmoid(add(mul(broadcast_spatial(w.spatial_scale, h, wd), gn),
                                broadcast_spatial(w.spatial_shift, h, wd)));
    Tensor ys = mul(xs, gate_s);

    Tensor merged = concat(yc, ys);
    out = g == 0 ? merged : concat(out, merged);
  }
  return channel_shuffle(out, groups);
}

LstmWeights make_lstm_weights(int d, int hidden, Rng& rng) {
  LstmWeights w;
  std::vector<double> data(static_cast<size_t>(4 * hidden) * (d + hidden));
  for (double& v : data) v = rng.normal(0.0, 0.02);
  w.w = Tensor::from_data({4 * hidden, d + hidden}, std::move(data), true);
  // Zero bias except the forget-gate rows, which start at +1 so early training
  // retains cell state.
  std::vector<double> bias(static_cast<size_t>(4 * hidden), 0.0);
  for (int i = hidden; i < 2 * hidden; ++i) bias[static_cast<size_t>(i)] = 1.0;
  w.b = Tensor::from_data({4 * hidden}, std::move(bias), true);
  return w;
}

RatBlockWeights make_rat_block_weights(int hidden, int channels, Rng& rng) {
  RatBlockWeights w;
  w.predictor.gamma = make_mlp1(channels, hidden, rng);
  w.predictor.beta = make_mlp1(channels, hidden, rng);
  w.conv_w = make_conv_weight(channels, channels, 3, rng);
  w.conv_b = make_bias(channels);
  return w;
}

CatBlockWeights make_cat_block_weights(int sentence_dim, int channels, Rng& rng) {
  // Hidden width follows the condition dimension, so the static baseline
  // stays lighter than the recurrent cell it is compared against.
  CatBlockWeights w;
  w.predictor.gamma = make_mlp2(channels, sentence_dim, sentence_dim, rng);
  w.predictor.beta = make_mlp2(channels, sentence_dim, sentence_dim, rng);
  w.conv_w = make_conv_weight(channels, channels, 3, rng);
  w.conv_b = make_bias(channels);
  return w;
}

ShuffleAttentionWeights make_shuffle_attention_weights(int channels, int groups) {
  if (groups < 1 || channels % (2 * groups) != 0) {
    throw ConfigError("shuffle_attention: " + std::to_string(channels) +
                      " channels not divisible by 2*" + std::to_string(groups) +
                      " groups");
  }
  const int half = channels / (2 * groups);
  ShuffleAttentionWeights w;
  w.channel_scale = Tensor::zeros({half}, true);
  w.channel_shift = Tensor::zeros({half}, true);
  w.spatial_scale = Tensor::zeros({half}, true);
  w.spatial_shift = Tensor::zeros({half}, true);
  return w;
}

void append_params(const LstmWeights& w, const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".w", w.w});
  out.push_back({prefix + ".b", w.b});
}

void append_params(const AffinePredictor& w, const std::string& prefix, ParamList& out) {
  append_params(w.gamma, prefix + ".gamma", out);
  append_params(w.beta, prefix + ".beta", out);
}

void append_params(const RatBlockWeights& w, const std::string& prefix, ParamList& out) {
  append_params(w.predictor, prefix, out);
  out.push_back({prefix + ".conv.w", w.conv_w});
  out.push_back({prefix + ".conv.b", w.conv_b});
}

void append_params(const CatBlockWeights& w, const std::string& prefix, ParamList& out) {
  append_params(w.predictor, prefix, out);
  out.push_back({prefix + ".conv.w", w.conv_w});
  out.push_back({prefix + ".conv.b", w.conv_b});
}

void append_params(const ShuffleAttentionWeights& w, const std::string& prefix,
                   ParamList& out) {
  out.push_back({prefix + ".channel_scale", w.channel_scale});
  out.push_back({prefix + ".channel_shift", w.channel_shift});
  out.push_back({prefix + ".spatial_scale", w.spatial_scale});
  out.push_back({prefix + ".spatial_shift", w.spatial_shift});
}

}  // namespace ratgan
