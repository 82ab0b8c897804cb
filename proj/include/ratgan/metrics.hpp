#pragma once

#include "ratgan/losses.hpp"

#include <vector>

namespace ratgan {

// Gaussian moment summary of a feature set.
struct FeatureStats {
  Tensor mean;  // [m]
  Tensor cov;   // [m,m], symmetric, shrunk by eps*I
};

constexpr double kCovShrinkage = 1e-6;

// Sample mean and population covariance with eps*I shrinkage.
FeatureStats feature_stats(const std::vector<Tensor>& features);

// |mu_a - mu_b|^2 + Tr(Sa + Sb - 2 (Sa Sb)^(1/2)), the matrix square root
// taken by eigendecomposition of the symmetrized product with tiny negative
// eigenvalues clamped to zero.
double frechet_distance(const FeatureStats& a, const FeatureStats& b);

// Mean cosine similarity between paired vectors, scaled by 100.
double paired_cosine_score(const std::vector<Tensor>& a, const std::vector<Tensor>& b);

// paired_cosine_score between projected encoder features and the sentences.
double toy_clip_score(const std::vector<Tensor>& images, const std::vector<Tensor>& ts,
                      const FrozenEncoder& enc, const Linear& proj);

}  // namespace ratgan
