#include "ratgan/ops.hpp"

#include <string>

namespace ratgan {

Tensor channel_shuffle(const Tensor& x, int groups) {
  if (x.rank() != 3) {
    throw ShapeError("channel_shuffle: expected [C,H,W], got " + x.shape_str());
  }
  const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  if (groups < 1 || c % groups != 0) {
    throw ConfigError("channel_shuffle: " + std::to_string(c) + " channels not divisible by " +
                      std::to_string(groups) + " groups");
  }
  const int per = c / groups;
  const int hw = h * w;
  const auto& xd = x.data();
  std::vector<double> out(xd.size());
  // View channels as (groups, per), transpose to (per, groups), flatten:
  // input channel g*per + k lands at output channel k*groups + g.
  for (int g = 0; g < groups; ++g) {
    for (int k = 0; k < per; ++k) {
      const double* src = xd.data() + static_cast<size_t>(g * per + k) * hw;
      double* dst = out.data() + static_cast<size_t>(k * groups + g) * hw;
      std::copy(src, src + hw, dst);
    }
  }
  return record_op("channel_shuffle", x.shape(), std::move(out), {x},
                   [per](const Tensor& g, const std::vector<bool>&) {
                     // The permutation's inverse is a shuffle with the
                     // complementary group count.
                     return std::vector<Tensor>{channel_shuffle(g, per)};
                   });
}

Tensor group_norm(const Tensor& x, int groups, double eps) {
  if (x.rank() != 3) {
    throw ShapeError("group_norm: expected [C,H,W], got " + x.shape_str());
  }
  const int c = x.shape()[0];
  if (groups < 1 || c % groups != 0) {
    throw ConfigError("group_norm: " + std::to_string(c) + " channels not divisible by " +
                      std::to_string(groups) + " groups");
  }
  if (eps <= 0.0) throw NumericError("group_norm: eps must be positive");
  const int per = c / groups;
  Tensor out;
  for (int g = 0; g < groups; ++g) {
    Tensor xg = slice(x, g * per, (g + 1) * per);
    Tensor mu = mean(xg);
    Tensor centered = sub(xg, broadcast_scalar(mu, xg.shape()));
    Tensor var = mean(mul(centered, centered));
    Tensor inv_std = reciprocal(sqrt_elem(add_scalar(var, eps)));
    Tensor yg = mul(centered, broadcast_scalar(inv_std, xg.shape()));
    out = g == 0 ? yg : concat(out, yg);
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  if (x.rank() != 3) {
    throw ShapeError("global_avg_pool: expected [C,H,W], got " + x.shape_str());
  }
  const double inv = 1.0 / static_cast<double>(x.shape()[1] * x.shape()[2]);
  return scale(channel_sum(x), inv);
}

Tensor nearest_upsample(const Tensor& x, int factor) {
  if (x.rank() != 3) {
    throw ShapeError("nearest_upsample: expected [C,H,W], got " + x.shape_str());
  }
  if (factor < 1) throw ShapeError("nearest_upsample: factor must be >= 1");
  const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  const int oh = h * factor, ow = w * factor;
  const auto& xd = x.data();
  std::vector<double> out(static_cast<size_t>(c) * oh * ow);
  for (int ch = 0; ch < c; ++ch) {
    const double* src = xd.data() + static_cast<size_t>(ch) * h * w;
    double* dst = out.data() + static_cast<size_t>(ch) * oh * ow;
    for (int i = 0; i < oh; ++i) {
      const double* srow = src + (i / factor) * w;
      double* drow = dst + static_cast<size_t>(i) * ow;
      for (int j = 0; j < ow; ++j) drow[j] = srow[j / factor];
    }
  }
  return record_op("nearest_upsample", {c, oh, ow}, std::move(out), {x},
                   [factor](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{block_sum_pool(g, factor)};
                   });
}

Tensor block_sum_pool(const Tensor& x, int factor) {
  if (x.rank() != 3) {
    throw ShapeError("block_sum_pool: expected [C,H,W], got " + x.shape_str());
  }
  const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  if (factor < 1 || h % factor != 0 || w % factor != 0) {
    throw ShapeError("block_sum_pool: " + x.shape_str() + " not divisible by factor " +
                     std::to_string(factor));
  }
  const int oh = h / factor, ow = w / factor;
  const auto& xd = x.data();
  std::vector<double> out(static_cast<size_t>(c) * oh * ow, 0.0);
  for (int ch = 0; ch < c; ++ch) {
    const double* src = xd.data() + static_cast<size_t>(ch) * h * w;
    double* dst = out.data() + static_cast<size_t>(ch) * oh * ow;
    for (int i = 0; i < h; ++i) {
      const double* srow = src + static_cast<size_t>(i) * w;
      double* drow = dst + static_cast<size_t>(i / factor) * ow;
      for (int j = 0; j < w; ++j) drow[j / factor] += srow[j];
    }
  }
  return record_op("block_sum_pool", {c, oh, ow}, std::move(out), {x},
                   [factor](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{nearest_upsample(g, factor)};
                   });
}

}  // namespace ratgan
