#pragma once

#include "ratgan/tensor.hpp"

namespace ratgan {

enum class Act { sigmoid, tanh, leaky_relu };

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor activation(const Tensor& x, Act kind);
Tensor sigmoid(const Tensor& x);
Tensor tanh_act(const Tensor& x);
Tensor leaky_relu(const Tensor& x);  // slope fixed at 0.2
Tensor relu(const Tensor& x);
Tensor reciprocal(const Tensor& x);
Tensor sqrt_elem(const Tensor& x);
Tensor pow_elem(const Tensor& x, double p);  // x >= 0 expected

// ---- reductions and broadcasts ----
Tensor sum(const Tensor& x);   // -> scalar [1]
Tensor mean(const Tensor& x);  // -> scalar [1]
Tensor broadcast_scalar(const Tensor& s, std::vector<int> shape);
Tensor channel_sum(const Tensor& x);                     // [C,H,W] -> [C]
Tensor broadcast_spatial(const Tensor& v, int h, int w); // [C] -> [C,H,W]

// ---- shape ----
Tensor reshape(const Tensor& x, std::vector<int> shape);
Tensor transpose(const Tensor& x);                 // rank-2
Tensor concat(const Tensor& a, const Tensor& b);   // along axis 0
Tensor slice(const Tensor& x, int from, int to);   // along axis 0
Tensor embed_slice(const Tensor& x, int total, int at);  // adjoint of slice

// ---- linear algebra ----
Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k]x[k,n] -> [m,n]

// ---- convolution family (cross-correlation, zero padding) ----
Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int pad);
Tensor conv2d_vjp_input(const Tensor& gy, const Tensor& w, int stride, int pad,
                        int in_h, int in_w);
Tensor conv2d_vjp_weight(const Tensor& x, const Tensor& gy, int stride, int pad,
                         int kh, int kw);

// ---- structural ops ----
Tensor channel_shuffle(const Tensor& x, int groups);
Tensor group_norm(const Tensor& x, int groups, double eps);
Tensor global_avg_pool(const Tensor& x);              // [C,H,W] -> [C]
Tensor nearest_upsample(const Tensor& x, int factor); // [C,H,W] -> [C,fH,fW]
Tensor block_sum_pool(const Tensor& x, int factor);   // adjoint of nearest_upsample

// ---- vector helpers (compositions, still fully differentiable) ----
Tensor dot(const Tensor& a, const Tensor& b);  // rank-1, -> scalar
Tensor l2_norm(const Tensor& a);               // -> scalar

}  // namespace ratgan
