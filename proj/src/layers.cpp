#include "ratgan/layers.hpp"

namespace ratgan {

namespace {

constexpr double kInitStddev = 0.02;

Tensor normal_tensor(std::vector<int> shape, Rng& rng) {
  std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
  for (double& v : data) v = rng.normal(0.0, kInitStddev);
  return Tensor::from_data(std::move(shape), std::move(data), /*requires_grad=*/true);
}

}  // namespace

Tensor linear_forward(const Linear& lin, const Tensor& x) {
  if (lin.w.rank() != 2 || x.rank() != 1 || lin.w.shape()[1] != x.shape()[0]) {
    throw ShapeError("linear: weight " + lin.w.shape_str() + " incompatible with input " +
                     x.shape_str());
  }
  const int out = lin.w.shape()[0];
  Tensor y = reshape(matmul(lin.w, reshape(x, {x.shape()[0], 1})), {out});
  return add(y, lin.b);
}

Tensor mlp_forward(const Tensor& x, const Mlp& w) {
  Tensor h = linear_forward(w.l1, x);
  if (w.kind == MlpKind::one_layer) return h;
  return linear_forward(w.l2, leaky_relu(h));
}

Linear make_linear(int out, int in, Rng& rng) {
  Linear lin;
  lin.w = normal_tensor({out, in}, rng);
  lin.b = make_bias(out);
  return lin;
}

Mlp make_mlp1(int out, int in, Rng& rng) {
  Mlp m;
  m.kind = MlpKind::one_layer;
  m.l1 = make_linear(out, in, rng);
  return m;
}

Mlp make_mlp2(int out, int hidden, int in, Rng& rng) {
  Mlp m;
  m.kind = MlpKind::two_layer;
  m.l1 = make_linear(hidden, in, rng);
  m.l2 = make_linear(out, hidden, rng);
  return m;
}

Tensor make_conv_weight(int cout, int cin, int k, Rng& rng) {
  return normal_tensor({cout, cin, k, k}, rng);
}

Tensor make_bias(int n) { return Tensor::zeros({n}, /*requires_grad=*/true); }

Tensor conv2d_bias(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
                   int pad) {
  Tensor y = conv2d(x, w, stride, pad);
  return add(y, broadcast_spatial(b, y.shape()[1], y.shape()[2]));
}

void append_params(const Linear& lin, const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".w", lin.w});
  out.push_back({prefix + ".b", lin.b});
}

void append_params(const Mlp& mlp, const std::string& prefix, ParamList& out) {
  append_params(mlp.l1, prefix + ".l1", out);
  if (mlp.kind == MlpKind::two_layer) append_params(mlp.l2, prefix + ".l2", out);
}

}  // namespace ratgan
