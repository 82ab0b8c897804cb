#include "ratgan/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace ratgan {

FeatureStats feature_stats(const std::vector<Tensor>& features) {
  if (features.empty()) throw UsageError("feature_stats: empty feature set");
  const int m = static_cast<int>(features.front().size());
  const size_t n = features.size();
  for (const Tensor& f : features) {
    if (f.size() != m) {
      throw ShapeError("feature_stats: inconsistent feature length " + f.shape_str());
    }
  }
  std::vector<double> mean(static_cast<size_t>(m), 0.0);
  for (const Tensor& f : features) {
    for (int k = 0; k < m; ++k) mean[static_cast<size_t>(k)] += f.data()[static_cast<size_t>(k)];
  }
  for (double& v : mean) v /= static_cast<double>(n);

  std::vector<double> cov(static_cast<size_t>(m) * m, 0.0);
  for (const Tensor& f : features) {
    for (int i = 0; i < m; ++i) {
      const double di = f.data()[static_cast<size_t>(i)] - mean[static_cast<size_t>(i)];
      for (int j = 0; j < m; ++j) {
        const double dj = f.data()[static_cast<size_t>(j)] - mean[static_cast<size_t>(j)];
        cov[static_cast<size_t>(i) * m + j] += di * dj;
      }
    }
  }
  for (double& v : cov) v /= static_cast<double>(n);
  for (int i = 0; i < m; ++i) cov[static_cast<size_t>(i) * m + i] += kCovShrinkage;

  FeatureStats out;
  out.mean = Tensor::from_data({m}, std::move(mean));
  out.cov = Tensor::from_data({m, m}, std::move(cov));
  return out;
}

double frechet_distance(const FeatureStats& a, const FeatureStats& b) {
  const int m = static_cast<int>(a.mean.size());
  if (b.mean.size() != m || a.cov.size() != static_cast<int64_t>(m) * m ||
      b.cov.size() != static_cast<int64_t>(m) * m) {
    throw ShapeError("frechet_distance: dimension mismatch " + a.mean.shape_str() +
                     " vs " + b.mean.shape_str());
  }
  using Mat = Eigen::MatrixXd;
  Eigen::Map<const Mat> sa(a.cov.data().data(), m, m);
  Eigen::Map<const Mat> sb(b.cov.data().data(), m, m);

  // The covariances themselves must be PSD (up to round-off). The symmetrized
  // product below is allowed to go indefinite for strongly anisotropic inputs,
  // so non-PSD-ness is diagnosed here, at the inputs, not on the product.
  const auto check_psd = [m](const Eigen::Map<const Mat>& s, const char* which) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
    if (es.info() != Eigen::Success) {
      throw NumericError("frechet_distance: eigendecomposition failed");
    }
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::fabs(es.eigenvalues()[i]));
    if (es.eigenvalues()[0] < -1e-8 * scale) {
      throw NumericError(std::string("frechet_distance: covariance ") + which +
                         " not PSD (eigenvalue " + std::to_string(es.eigenvalues()[0]) +
                         ")");
    }
  };
  check_psd(sa, "a");
  check_psd(sb, "b");

  const Mat prod = sa * sb;
  const Mat sym = 0.5 * (prod + prod.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericError("frechet_distance: eigendecomposition failed");
  }
  double sqrt_trace = 0.0;
  for (int i = 0; i < m; ++i) {
    sqrt_trace += std::sqrt(std::max(eig.eigenvalues()[i], 0.0));
  }

  double mean_term = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d = a.mean.data()[static_cast<size_t>(i)] - b.mean.data()[static_cast<size_t>(i)];
    mean_term += d * d;
  }
  return mean_term + sa.trace() + sb.trace() - 2.0 * sqrt_trace;
}

double paired_cosine_score(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("paired_cosine_score: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + " samples");
  }
  if (a.empty()) throw UsageError("paired_cosine_score: empty sample set");
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) total += cosine_similarity(a[i], b[i]);
  return 100.0 * total / static_cast<double>(a.size());
}

double toy_clip_score(const std::vector<Tensor>& images, const std::vector<Tensor>& ts,
                      const FrozenEncoder& enc, const Linear& proj) {
  if (images.size() != ts.size()) {
    throw ShapeError("toy_clip_score: " + std::to_string(images.size()) + " images vs " +
                     std::to_string(ts.size()) + " sentences");
  }
  if (images.empty()) throw UsageError("toy_clip_score: empty sample set");
  std::vector<Tensor> embedded;
  embedded.reserve(images.size());
  NoGradGuard guard;
  for (const Tensor& img : images) embedded.push_back(embed_image(img, enc, proj));
  return paired_cosine_score(embedded, ts);
}

}  // namespace ratgan
