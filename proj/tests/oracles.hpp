#pragma once

// Naive reference implementations used to cross-check the library. These are
// written as plain loops over raw buffers, sharing no code with the library
// under test.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// Triple-loop matrix product: a is m x k, b is k x n, result m x n, row-major.
inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b,
                                  int m, int k, int n) {
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) {
        acc += a[static_cast<size_t>(i) * k + t] * b[static_cast<size_t>(t) * n + j];
      }
      out[static_cast<size_t>(i) * n + j] = acc;
    }
  }
  return out;
}

// Direct sliding-window cross-correlation with zero padding.
// x: cin x h x w, wgt: cout x cin x kh x kw, both row-major.
inline std::vector<double> conv2d(const std::vector<double>& x, int cin, int h, int w,
                                  const std::vector<double>& wgt, int cout, int kh, int kw,
                                  int stride, int pad) {
  const int ho = (h + 2 * pad - kh) / stride + 1;
  const int wo = (w + 2 * pad - kw) / stride + 1;
  std::vector<double> out(static_cast<size_t>(cout) * ho * wo, 0.0);
  for (int co = 0; co < cout; ++co) {
    for (int i = 0; i < ho; ++i) {
      for (int j = 0; j < wo; ++j) {
        double acc = 0.0;
        for (int ci = 0; ci < cin; ++ci) {
          for (int di = 0; di < kh; ++di) {
            for (int dj = 0; dj < kw; ++dj) {
              const int a = i * stride - pad + di;
              const int b = j * stride - pad + dj;
              if (a < 0 || a >= h || b < 0 || b >= w) continue;
              const double xv = x[(static_cast<size_t>(ci) * h + a) * w + b];
              const double wv =
                  wgt[((static_cast<size_t>(co) * cin + ci) * kh + di) * kw + dj];
              acc += xv * wv;
            }
          }
        }
        out[(static_cast<size_t>(co) * ho + i) * wo + j] = acc;
      }
    }
  }
  return out;
}

// Index-map nearest upsample: out[c][i][j] = x[c][i/f][j/f].
inline std::vector<double> nearest_upsample(const std::vector<double>& x, int c, int h,
                                            int w, int f) {
  std::vector<double> out(static_cast<size_t>(c) * h * f * w * f);
  for (int ch = 0; ch < c; ++ch) {
    for (int i = 0; i < h * f; ++i) {
      for (int j = 0; j < w * f; ++j) {
        out[(static_cast<size_t>(ch) * h * f + i) * (w * f) + j] =
            x[(static_cast<size_t>(ch) * h + i / f) * w + j / f];
      }
    }
  }
  return out;
}

// Per-channel spatial mean by direct summation.
inline std::vector<double> global_avg_pool(const std::vector<double>& x, int c, int h,
                                           int w) {
  std::vector<double> out(static_cast<size_t>(c), 0.0);
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (int i = 0; i < h * w; ++i) acc += x[static_cast<size_t>(ch) * h * w + i];
    out[static_cast<size_t>(ch)] = acc / (h * w);
  }
  return out;
}

// Two-pass mean/variance over a raw span (population variance, divide by n).
struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

inline Moments moments(const double* p, size_t n) {
  Moments m;
  for (size_t i = 0; i < n; ++i) m.mean += p[i];
  m.mean /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const double d = p[i] - m.mean;
    m.var += d * d;
  }
  m.var /= static_cast<double>(n);
  return m;
}

// Scalar-loop LSTM cell: gate rows ordered [i, f, o, u] in a 4D x (d+D)
// matrix applied to the concatenation (s; h_prev).
struct LstmStepOut {
  std::vector<double> h, c, i, f, o, u;
};

inline LstmStepOut lstm_step(const std::vector<double>& w, const std::vector<double>& b,
                             const std::vector<double>& s, const std::vector<double>& h_prev,
                             const std::vector<double>& c_prev) {
  const int d = static_cast<int>(s.size());
  const int hidden = static_cast<int>(h_prev.size());
  const int in = d + hidden;
  std::vector<double> x(static_cast<size_t>(in));
  for (int k = 0; k < d; ++k) x[static_cast<size_t>(k)] = s[static_cast<size_t>(k)];
  for (int k = 0; k < hidden; ++k) x[static_cast<size_t>(d + k)] = h_prev[static_cast<size_t>(k)];

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  LstmStepOut out;
  out.i.resize(hidden);
  out.f.resize(hidden);
  out.o.resize(hidden);
  out.u.resize(hidden);
  out.c.resize(hidden);
  out.h.resize(hidden);
  for (int j = 0; j < hidden; ++j) {
    double pre[4];
    for (int gate = 0; gate < 4; ++gate) {
      const int row = gate * hidden + j;
      double acc = b[static_cast<size_t>(row)];
      for (int k = 0; k < in; ++k) {
        acc += w[static_cast<size_t>(row) * in + k] * x[static_cast<size_t>(k)];
      }
      pre[gate] = acc;
    }
    out.i[static_cast<size_t>(j)] = sig(pre[0]);
    out.f[static_cast<size_t>(j)] = sig(pre[1]);
    out.o[static_cast<size_t>(j)] = sig(pre[2]);
    out.u[static_cast<size_t>(j)] = std::tanh(pre[3]);
    out.c[static_cast<size_t>(j)] = out.f[static_cast<size_t>(j)] * c_prev[static_cast<size_t>(j)] +
                                    out.i[static_cast<size_t>(j)] * out.u[static_cast<size_t>(j)];
    out.h[static_cast<size_t>(j)] =
        out.o[static_cast<size_t>(j)] * std::tanh(out.c[static_cast<size_t>(j)]);
  }
  return out;
}

// Direct per-group shuffle attention: split each group into a channel-gated
// half and a normalization-gated half, gate, re-concatenate, then apply the
// channel shuffle permutation.
inline std::vector<double> shuffle_attention(const std::vector<double>& x, int c, int h,
                                             int w, int groups,
                                             const std::vector<double>& ch_scale,
                                             const std::vector<double>& ch_shift,
                                             const std::vector<double>& sp_scale,
                                             const std::vector<double>& sp_shift,
                                             double eps) {
  const int per = c / groups;
  const int half = per / 2;
  const int hw = h * w;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> gated(x.size());
  for (int g = 0; g < groups; ++g) {
    for (int k = 0; k < half; ++k) {
      // Channel branch: one sigmoid gate per channel from its spatial mean.
      const int ch = g * per + k;
      const double* src = x.data() + static_cast<size_t>(ch) * hw;
      double mean = 0.0;
      for (int t = 0; t < hw; ++t) mean += src[t];
      mean /= hw;
      const double gate = sig(ch_scale[static_cast<size_t>(k)] * mean +
                              ch_shift[static_cast<size_t>(k)]);
      double* dst = gated.data() + static_cast<size_t>(ch) * hw;
      for (int t = 0; t < hw; ++t) dst[t] = src[t] * gate;
    }
    for (int k = 0; k < half; ++k) {
      // Spatial branch: per-pixel gate from the per-channel normalized map.
      const int ch = g * per + half + k;
      const double* src = x.data() + static_cast<size_t>(ch) * hw;
      const Moments m = moments(src, static_cast<size_t>(hw));
      const double inv = 1.0 / std::sqrt(m.var + eps);
      double* dst = gated.data() + static_cast<size_t>(ch) * hw;
      for (int t = 0; t < hw; ++t) {
        const double normed = (src[t] - m.mean) * inv;
        dst[t] = src[t] * sig(sp_scale[static_cast<size_t>(k)] * normed +
                              sp_shift[static_cast<size_t>(k)]);
      }
    }
  }
  // channel_shuffle: input channel g*per2 + k goes to output channel k*groups + g.
  const int per2 = c / groups;
  std::vector<double> out(x.size());
  for (int g = 0; g < groups; ++g) {
    for (int k = 0; k < per2; ++k) {
      const double* src = gated.data() + static_cast<size_t>(g * per2 + k) * hw;
      double* dst = out.data() + static_cast<size_t>(k * groups + g) * hw;
      for (int t = 0; t < hw; ++t) dst[t] = src[t];
    }
  }
  return out;
}

}  // namespace oracle
