#include "ratgan/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace ratgan {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

void require_rank(const char* op, const Tensor& x, int rank) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got " + x.shape_str());
  }
}

}  // namespace

// ---- elementwise ----

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> out(a.data());
  const auto& bd = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return record_op("add", a.shape(), std::move(out), {a, b},
                   [](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{g, g};
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> out(a.data());
  const auto& bd = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
  return record_op("sub", a.shape(), std::move(out), {a, b},
                   [](const Tensor& g, const std::vector<bool>& needs) {
                     std::vector<Tensor> gs(2);
                     if (needs[0]) gs[0] = g;
                     if (needs[1]) gs[1] = neg(g);
                     return gs;
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> out(a.data());
  const auto& bd = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  return record_op("mul", a.shape(), std::move(out), {a, b},
                   [a, b](const Tensor& g, const std::vector<bool>& needs) {
                     std::vector<Tensor> gs(2);
                     if (needs[0]) gs[0] = mul(g, b);
                     if (needs[1]) gs[1] = mul(g, a);
                     return gs;
                   });
}

Tensor neg(const Tensor& a) {
  std::vector<double> out(a.data());
  for (double& v : out) v = -v;
  return record_op("neg", a.shape(), std::move(out), {a},
                   [](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{neg(g)};
                   });
}

Tensor scale(const Tensor& a, double s) {
  if (!std::isfinite(s)) throw NumericError("scale: non-finite factor");
  std::vector<double> out(a.data());
  for (double& v : out) v *= s;
  return record_op("scale", a.shape(), std::move(out), {a},
                   [s](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{scale(g, s)};
                   });
}

Tensor add_scalar(const Tensor& a, double s) {
  if (!std::isfinite(s)) throw NumericError("add_scalar: non-finite addend");
  std::vector<double> out(a.data());
  for (double& v : out) v += s;
  return record_op("add_scalar", a.shape(), std::move(out), {a},
                   [](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{g};
                   });
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kLeakySlope = 0.2;

}  // namespace

Tensor activation(const Tensor& x, Act kind) {
  switch (kind) {
    case Act::sigmoid:
      return sigmoid(x);
    case Act::tanh:
      return tanh_act(x);
    case Act::leaky_relu:
      return leaky_relu(x);
  }
  throw UsageError("activation: unknown kind");
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = stable_sigmoid(v);
  return record_op("sigmoid", x.shape(), std::move(out), {x},
                   [x](const Tensor& g, const std::vector<bool>&) {
                     Tensor y = sigmoid(x);
                     Tensor dy = mul(y, add_scalar(neg(y), 1.0));
                     return std::vector<Tensor>{mul(g, dy)};
                   });
}

Tensor tanh_act(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = std::tanh(v);
  return record_op("tanh", x.shape(), std::move(out), {x},
                   [x](const Tensor& g, const std::vector<bool>&) {
                     Tensor y = tanh_act(x);
                     Tensor one_minus_y2 = add_scalar(neg(mul(y, y)), 1.0);
                     return std::vector<Tensor>{mul(g, one_minus_y2)};
                   });
}

Tensor leaky_relu(const Tensor& x) {
  const auto& xd = x.data();
  std::vector<double> out(xd.size());
  std::vector<double> mask(xd.size());
  for (size_t i = 0; i < xd.size(); ++i) {
    const bool pos = xd[i] >= 0.0;
    out[i] = pos ? xd[i] : kLeakySlope * xd[i];
    mask[i] = pos ? 1.0 : kLeakySlope;
  }
  Tensor mask_t = Tensor::from_data(x.shape(), std::move(mask));
  return record_op("leaky_relu", x.shape(), std::move(out), {x},
                   [mask_t](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{mul(g, mask_t)};
                   });
}

Tensor relu(const Tensor& x) {
  const auto& xd = x.data();
  std::vector<double> out(xd.size());
  std::vector<double> mask(xd.size());
  for (size_t i = 0; i < xd.size(); ++i) {
    const bool pos = xd[i] > 0.0;
    out[i] = pos ? xd[i] : 0.0;
    mask[i] = pos ? 1.0 : 0.0;
  }
  Tensor mask_t = Tensor::from_data(x.shape(), std::move(mask));
  return record_op("relu", x.shape(), std::move(out), {x},
                   [mask_t](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{mul(g, mask_t)};
                   });
}

Tensor reciprocal(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = 1.0 / v;
  return record_op("reciprocal", x.shape(), std::move(out), {x},
                   [x](const Tensor& g, const std::vector<bool>&) {
                     Tensor y = reciprocal(x);
                     return std::vector<Tensor>{neg(mul(g, mul(y, y)))};
                   });
}

Tensor sqrt_elem(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = std::sqrt(v);
  return record_op("sqrt", x.shape(), std::move(out), {x},
                   [x](const Tensor& g, const std::vector<bool>&) {
                     Tensor y = sqrt_elem(x);
                     return std::vector<Tensor>{scale(mul(g, reciprocal(y)), 0.5)};
                   });
}

Tensor pow_elem(const Tensor& x, double p) {
  if (!std::isfinite(p)) throw NumericError("pow: non-finite exponent");
  std::vector<double> out(x.data());
  for (double& v : out) v = std::pow(v, p);
  return record_op("pow", x.shape(), std::move(out), {x},
                   [x, p](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{scale(mul(g, pow_elem(x, p - 1.0)), p)};
                   });
}

// ---- reductions and broadcasts ----

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (const double v : x.data()) acc += v;
  return record_op("sum", {1}, {acc}, {x},
                   [shape = x.shape()](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{broadcast_scalar(g, shape)};
                   });
}

Tensor mean(const Tensor& x) {
  const double inv_n = 1.0 / static_cast<double>(x.size());
  double acc = 0.0;
  for (const double v : x.data()) acc += v;
  return record_op("mean", {1}, {acc * inv_n}, {x},
                   [shape = x.shape(), inv_n](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{scale(broadcast_scalar(g, shape), inv_n)};
                   });
}

Tensor broadcast_scalar(const Tensor& s, std::vector<int> shape) {
  if (s.size() != 1) throw ShapeError("broadcast_scalar: source is not a scalar");
  const int64_t n = shape_numel(shape);
  std::vector<double> out(static_cast<size_t>(n), s.data()[0]);
  return record_op("broadcast_scalar", std::move(shape), std::move(out), {s},
                   [](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{sum(g)};
                   });
}

Tensor channel_sum(const Tensor& x) {
  require_rank("channel_sum", x, 3);
  const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  const int hw = h * w;
  const auto& xd = x.data();
  std::vector<double> out(static_cast<size_t>(c), 0.0);
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    const double* p = xd.data() + static_cast<size_t>(ch) * hw;
    for (int i = 0; i < hw; ++i) acc += p[i];
    out[static_cast<size_t>(ch)] = acc;
  }
  return record_op("channel_sum", {c}, std::move(out), {x},
                   [h, w](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{broadcast_spatial(g, h, w)};
                   });
}

Tensor broadcast_spatial(const Tensor& v, int h, int w) {
  require_rank("broadcast_spatial", v, 1);
  if (h <= 0 || w <= 0) throw ShapeError("broadcast_spatial: non-positive extent");
  const int c = v.shape()[0];
  const int hw = h * w;
  const auto& vd = v.data();
  std::vector<double> out(static_cast<size_t>(c) * hw);
  for (int ch = 0; ch < c; ++ch) {
    double* p = out.data() + static_cast<size_t>(ch) * hw;
    for (int i = 0; i < hw; ++i) p[i] = vd[static_cast<size_t>(ch)];
  }
  return record_op("broadcast_spatial", {c, h, w}, std::move(out), {v},
                   [](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{channel_sum(g)};
                   });
}

// ---- shape ----

Tensor reshape(const Tensor& x, std::vector<int> shape) {
  if (shape_numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + x.shape_str() + " as " +
                     shape_to_string(shape));
  }
  return record_op("reshape", std::move(shape), x.data(), {x},
                   [shape = x.shape()](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{reshape(g, shape)};
                   });
}

Tensor transpose(const Tensor& x) {
  require_rank("transpose", x, 2);
  const int m = x.shape()[0], n = x.shape()[1];
  const auto& xd = x.data();
  std::vector<double> out(xd.size());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      out[static_cast<size_t>(j) * m + i] = xd[static_cast<size_t>(i) * n + j];
    }
  }
  return record_op("transpose", {n, m}, std::move(out), {x},
                   [](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{transpose(g)};
                   });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank() || a.rank() < 1) {
    throw ShapeError("concat: rank mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  for (int d = 1; d < a.rank(); ++d) {
    if (a.shape()[static_cast<size_t>(d)] != b.shape()[static_cast<size_t>(d)]) {
      throw ShapeError("concat: trailing dims differ, " + a.shape_str() + " vs " +
                       b.shape_str());
    }
  }
  std::vector<int> shape = a.shape();
  shape[0] += b.shape()[0];
  std::vector<double> out;
  out.reserve(a.data().size() + b.data().size());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const int a0 = a.shape()[0];
  const int b0 = b.shape()[0];
  return record_op("concat", std::move(shape), std::move(out), {a, b},
                   [a0, b0](const Tensor& g, const std::vector<bool>& needs) {
                     std::vector<Tensor> gs(2);
                     if (needs[0]) gs[0] = slice(g, 0, a0);
                     if (needs[1]) gs[1] = slice(g, a0, a0 + b0);
                     return gs;
                   });
}

Tensor slice(const Tensor& x, int from, int to) {
  if (x.rank() < 1) throw ShapeError("slice: rank-0 input");
  const int d0 = x.shape()[0];
  if (from < 0 || to <= from || to > d0) {
    throw ShapeError("slice: range [" + std::to_string(from) + "," + std::to_string(to) +
                     ") invalid for " + x.shape_str());
  }
  const int64_t row = x.size() / d0;
  std::vector<int> shape = x.shape();
  shape[0] = to - from;
  std::vector<double> out(x.data().begin() + from * row, x.data().begin() + to * row);
  return record_op("slice", std::move(shape), std::move(out), {x},
                   [d0, from](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{embed_slice(g, d0, from)};
                   });
}

Tensor embed_slice(const Tensor& x, int total, int at) {
  if (x.rank() < 1) throw ShapeError("embed_slice: rank-0 input");
  const int d0 = x.shape()[0];
  if (at < 0 || total < d0 || at + d0 > total) {
    throw ShapeError("embed_slice: cannot place " + x.shape_str() + " at row " +
                     std::to_string(at) + " of " + std::to_string(total));
  }
  const int64_t row = x.size() / d0;
  std::vector<int> shape = x.shape();
  shape[0] = total;
  std::vector<double> out(static_cast<size_t>(total * row), 0.0);
  std::copy(x.data().begin(), x.data().end(), out.begin() + at * row);
  return record_op("embed_slice", std::move(shape), std::move(out), {x},
                   [d0, at](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{slice(g, at, at + d0)};
                   });
}

// ---- linear algebra ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const int m = a.shape()[0], k = a.shape()[1];
  const int k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2) {
    throw ShapeError("matmul: inner dims differ, " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  using MatrixRM =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const MatrixRM> ma(a.data().data(), m, k);
  Eigen::Map<const MatrixRM> mb(b.data().data(), k, n);
  std::vector<double> out(static_cast<size_t>(m) * n);
  Eigen::Map<MatrixRM> mo(out.data(), m, n);
  mo.noalias() = ma * mb;
  return record_op("matmul", {m, n}, std::move(out), {a, b},
                   [a, b](const Tensor& g, const std::vector<bool>& needs) {
                     std::vector<Tensor> gs(2);
                     if (needs[0]) gs[0] = matmul(g, transpose(b));
                     if (needs[1]) gs[1] = matmul(transpose(a), g);
                     return gs;
                   });
}

// ---- vector helpers ----

Tensor dot(const Tensor& a, const Tensor& b) {
  require_rank("dot", a, 1);
  require_same_shape("dot", a, b);
  return sum(mul(a, b));
}

Tensor l2_norm(const Tensor& a) {
  if (a.rank() != 1) {
    return l2_norm(reshape(a, {static_cast<int>(a.size())}));
  }
  return sqrt_elem(dot(a, a));
}

}  // namespace ratgan
