#pragma once

#include "ratgan/ops.hpp"
#include "ratgan/rng.hpp"

#include <string>
#include <vector>

namespace ratgan {

// A trainable tensor with the stable name used by optimizers and checkpoints.
struct NamedParam {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedParam>;

struct Linear {
  Tensor w;  // [out, in]
  Tensor b;  // [out]
};

enum class MlpKind { one_layer, two_layer };

struct Mlp {
  MlpKind kind = MlpKind::one_layer;
  Linear l1;
  Linear l2;  // used only by two_layer
};

// y = W x + b for rank-1 x.
Tensor linear_forward(const Linear& lin, const Tensor& x);

// Affine map (one layer) or affine - leaky_relu - affine (two layers).
Tensor mlp_forward(const Tensor& x, const Mlp& w);

// Weight initialization: N(0, 0.02^2) matrices, zero biases.
Linear make_linear(int out, int in, Rng& rng);
Mlp make_mlp1(int out, int in, Rng& rng);
Mlp make_mlp2(int out, int hidden, int in, Rng& rng);
Tensor make_conv_weight(int cout, int cin, int k, Rng& rng);
Tensor make_bias(int n);

// conv2d followed by a per-channel bias.
Tensor conv2d_bias(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
                   int pad);

void append_params(const Linear& lin, const std::string& prefix, ParamList& out);
void append_params(const Mlp& mlp, const std::string& prefix, ParamList& out);

}  // namespace ratgan
