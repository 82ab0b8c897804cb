#include "ratgan/ops.hpp"

#include <Eigen/Core>

#include <string>

namespace ratgan {

namespace {

using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConvDims {
  int cin, h, w;
  int cout, kh, kw;
  int ho, wo;
};

int out_extent(const char* op, int in, int k, int stride, int pad) {
  const int span = in + 2 * pad - k;
  if (span < 0) {
    throw ShapeError(std::string(op) + ": kernel extent " + std::to_string(k) +
                     " exceeds padded input " + std::to_string(in + 2 * pad));
  }
  return span / stride + 1;
}

void require_conv_args(const char* op, int stride, int pad) {
  if (stride < 1) throw ShapeError(std::string(op) + ": stride must be >= 1");
  if (pad < 0) throw ShapeError(std::string(op) + ": pad must be >= 0");
}

// Gather kh*kw patches into a (cin*kh*kw) x (ho*wo) matrix, zero padding
// outside the input. Column o = i*wo + j holds the patch under output (i, j).
std::vector<double> im2col(const std::vector<double>& x, const ConvDims& d, int stride,
                           int pad) {
  const int k_rows = d.cin * d.kh * d.kw;
  const int cols = d.ho * d.wo;
  std::vector<double> col(static_cast<size_t>(k_rows) * cols, 0.0);
  for (int ci = 0; ci < d.cin; ++ci) {
    const double* plane = x.data() + static_cast<size_t>(ci) * d.h * d.w;
    for (int di = 0; di < d.kh; ++di) {
      for (int dj = 0; dj < d.kw; ++dj) {
        const int k = (ci * d.kh + di) * d.kw + dj;
        double* row = col.data() + static_cast<size_t>(k) * cols;
        for (int i = 0; i < d.ho; ++i) {
          const int a = i * stride - pad + di;
          if (a < 0 || a >= d.h) continue;
          for (int j = 0; j < d.wo; ++j) {
            const int b = j * stride - pad + dj;
            if (b < 0 || b >= d.w) continue;
            row[i * d.wo + j] = plane[a * d.w + b];
          }
        }
      }
    }
  }
  return col;
}

// Scatter-add the adjoint of im2col: fold a (cin*kh*kw) x (ho*wo) matrix back
// into an input-shaped buffer.
void col2im_add(const std::vector<double>& col, const ConvDims& d, int stride, int pad,
                std::vector<double>& x) {
  const int cols = d.ho * d.wo;
  for (int ci = 0; ci < d.cin; ++ci) {
    double* plane = x.data() + static_cast<size_t>(ci) * d.h * d.w;
    for (int di = 0; di < d.kh; ++di) {
      for (int dj = 0; dj < d.kw; ++dj) {
        const int k = (ci * d.kh + di) * d.kw + dj;
        const double* row = col.data() + static_cast<size_t>(k) * cols;
        for (int i = 0; i < d.ho; ++i) {
          const int a = i * stride - pad + di;
          if (a < 0 || a >= d.h) continue;
          for (int j = 0; j < d.wo; ++j) {
            const int b = j * stride - pad + dj;
            if (b < 0 || b >= d.w) continue;
            plane[a * d.w + b] += row[i * d.wo + j];
          }
        }
      }
    }
  }
}

ConvDims dims_from_xw(const char* op, const Tensor& x, const Tensor& w, int stride,
                      int pad) {
  require_conv_args(op, stride, pad);
  if (x.rank() != 3) throw ShapeError(std::string(op) + ": input must be [C,H,W], got " + x.shape_str());
  if (w.rank() != 4) throw ShapeError(std::string(op) + ": weight must be [Co,Ci,kh,kw], got " + w.shape_str());
  ConvDims d;
  d.cin = x.shape()[0];
  d.h = x.shape()[1];
  d.w = x.shape()[2];
  d.cout = w.shape()[0];
  d.kh = w.shape()[2];
  d.kw = w.shape()[3];
  if (w.shape()[1] != d.cin) {
    throw ShapeError(std::string(op) + ": weight expects " + std::to_string(w.shape()[1]) +
                     " input channels, input has " + std::to_string(d.cin));
  }
  d.ho = out_extent(op, d.h, d.kh, stride, pad);
  d.wo = out_extent(op, d.w, d.kw, stride, pad);
  return d;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int pad) {
  const ConvDims d = dims_from_xw("conv2d", x, w, stride, pad);
  const int k_rows = d.cin * d.kh * d.kw;
  const int cols = d.ho * d.wo;

  const std::vector<double> col = im2col(x.data(), d, stride, pad);
  std::vector<double> out(static_cast<size_t>(d.cout) * cols);
  {
    Eigen::Map<const MatrixRM> mw(w.data().data(), d.cout, k_rows);
    Eigen::Map<const MatrixRM> mc(col.data(), k_rows, cols);
    Eigen::Map<MatrixRM> mo(out.data(), d.cout, cols);
    mo.noalias() = mw * mc;
  }
  const int in_h = d.h, in_w = d.w, kh = d.kh, kw = d.kw;
  return record_op("conv2d", {d.cout, d.ho, d.wo}, std::move(out), {x, w},
                   [x, w, stride, pad, in_h, in_w, kh, kw](const Tensor& g,
                                                           const std::vector<bool>& needs) {
                     std::vector<Tensor> gs(2);
                     if (needs[0]) gs[0] = conv2d_vjp_input(g, w, stride, pad, in_h, in_w);
                     if (needs[1]) gs[1] = conv2d_vjp_weight(x, g, stride, pad, kh, kw);
                     return gs;
                   });
}

Tensor conv2d_vjp_input(const Tensor& gy, const Tensor& w, int stride, int pad, int in_h,
                        int in_w) {
  require_conv_args("conv2d_vjp_input", stride, pad);
  if (gy.rank() != 3 || w.rank() != 4) {
    throw ShapeError("conv2d_vjp_input: expected [Co,Ho,Wo] and [Co,Ci,kh,kw], got " +
                     gy.shape_str() + " and " + w.shape_str());
  }
  ConvDims d;
  d.cout = w.shape()[0];
  d.cin = w.shape()[1];
  d.kh = w.shape()[2];
  d.kw = w.shape()[3];
  d.h = in_h;
  d.w = in_w;
  d.ho = out_extent("conv2d_vjp_input", in_h, d.kh, stride, pad);
  d.wo = out_extent("conv2d_vjp_input", in_w, d.kw, stride, pad);
  if (gy.shape()[0] != d.cout || gy.shape()[1] != d.ho || gy.shape()[2] != d.wo) {
    throw ShapeError("conv2d_vjp_input: output grad " + gy.shape_str() +
                     " inconsistent with weight/geometry");
  }
  const int k_rows = d.cin * d.kh * d.kw;
  const int cols = d.ho * d.wo;

  std::vector<double> col(static_cast<size_t>(k_rows) * cols);
  {
    Eigen::Map<const MatrixRM> mw(w.data().data(), d.cout, k_rows);
    Eigen::Map<const MatrixRM> mg(gy.data().data(), d.cout, cols);
    Eigen::Map<MatrixRM> mc(col.data(), k_rows, cols);
    mc.noalias() = mw.transpose() * mg;
  }
  std::vector<double> gx(static_cast<size_t>(d.cin) * in_h * in_w, 0.0);
  col2im_add(col, d, stride, pad, gx);
  return record_op("conv2d_vjp_input", {d.cin, in_h, in_w}, std::move(gx), {gy, w},
                   [gy, w, stride, pad](const Tensor& g, const std::vector<bool>& needs) {
                     std::vector<Tensor> gs(2);
                     if (needs[0]) gs[0] = conv2d(g, w, stride, pad);
                     if (needs[1]) {
                       gs[1] = conv2d_vjp_weight(g, gy, stride, pad, w.shape()[2],
                                                 w.shape()[3]);
                     }
                     return gs;
                   });
}

Tensor conv2d_vjp_weight(const Tensor& x, const Tensor& gy, int stride, int pad, int kh,
                         int kw) {
  require_conv_args("conv2d_vjp_weight", stride, pad);
  if (x.rank() != 3 || gy.rank() != 3) {
    throw ShapeError("conv2d_vjp_weight: expected [Ci,H,W] and [Co,Ho,Wo], got " +
                     x.shape_str() + " and " + gy.shape_str());
  }
  if (kh < 1 || kw < 1) throw ShapeError("conv2d_vjp_weight: kernel extents must be >= 1");
  ConvDims d;
  d.cin = x.shape()[0];
  d.h = x.shape()[1];
  d.w = x.shape()[2];
  d.cout = gy.shape()[0];
  d.kh = kh;
  d.kw = kw;
  d.ho = out_extent("conv2d_vjp_weight", d.h, kh, stride, pad);
  d.wo = out_extent("conv2d_vjp_weight", d.w, kw, stride, pad);
  if (gy.shape()[1] != d.ho || gy.shape()[2] != d.wo) {
    throw ShapeError("conv2d_vjp_weight: output grad " + gy.shape_str() +
                     " inconsistent with input/geometry");
  }
  const int k_rows = d.cin * kh * kw;
  const int cols = d.ho * d.wo;

  const std::vector<double> col = im2col(x.data(), d, stride, pad);
  std::vector<double> gw(static_cast<size_t>(d.cout) * k_rows);
  {
    Eigen::Map<const MatrixRM> mg(gy.data().data(), d.cout, cols);
    Eigen::Map<const MatrixRM> mc(col.data(), k_rows, cols);
    Eigen::Map<MatrixRM> mw(gw.data(), d.cout, k_rows);
    mw.noalias() = mg * mc.transpose();
  }
  const int in_h = d.h, in_w = d.w;
  return record_op("conv2d_vjp_weight", {d.cout, d.cin, kh, kw}, std::move(gw), {x, gy},
                   [x, gy, stride, pad, in_h, in_w](const Tensor& g,
                                                    const std::vector<bool>& needs) {
                     std::vector<Tensor> gs(2);
                     if (needs[0]) gs[0] = conv2d_vjp_input(gy, g, stride, pad, in_h, in_w);
                     if (needs[1]) gs[1] = conv2d(x, g, stride, pad);
                     return gs;
                   });
}

}  // namespace ratgan
