#pragma once

#include "ratgan/discriminator.hpp"

#include <cstdint>
#include <functional>

namespace ratgan {

struct LossHyperparams {
  double k = 2.0;       // gradient-penalty coefficient
  double p = 6.0;       // gradient-penalty exponent
  double lambda = 4.0;  // similarity-reward weight
  void validate() const;
};

// Hinge terms of the discriminator objective:
//   -min(0, -1+s_real) - 0.5*min(0, -1-s_fake) - 0.5*min(0, -1-s_mis)
// Zero exactly when every margin is satisfied, positive otherwise.
double hinge_d_terms(double score_real, double score_fake, double score_mis);
// Recorded twin over scalar tensors, for backprop through the scores.
Tensor hinge_d_terms(const Tensor& score_real, const Tensor& score_fake,
                     const Tensor& score_mis);

// -score_fake - lambda * sim
double generator_loss(double score_fake, double sim, const LossHyperparams& hp);
Tensor generator_loss(const Tensor& score_fake, const Tensor& sim,
                      const LossHyperparams& hp);

// a.b / (|a||b|); throws NumericError when either vector is zero.
double cosine_similarity(const Tensor& a, const Tensor& b);
Tensor cosine_similarity_graph(const Tensor& a, const Tensor& b);

// Scalar score over a (feature-map, sentence) pair, both treated as leaves.
using FeatureScoreFn = std::function<Tensor(const Tensor& feats, const Tensor& t)>;

// k * (|d score/d feats| + |d score/d t|)^p for one sample, evaluated at the
// given point. The gradients are recorded (create-graph) so the penalty can
// itself be differentiated when it trains the scoring head.
Tensor gradient_penalty_term(const FeatureScoreFn& score_fn, const Tensor& feats,
                             const Tensor& t, const LossHyperparams& hp);

// Penalty of the full discriminator at one real sample; gradients are taken
// with respect to the frozen-encoder output features and the sentence.
double gradient_penalty(const Tensor& img, const Tensor& t, const FrozenEncoder& enc,
                        const DiscriminatorWeights& w, const LossHyperparams& hp);

// Frozen seeded linear map embedding pooled encoder features into sentence
// space, so the similarity reward compares like-dimensioned vectors.
Linear make_similarity_projection(int sentence_dim, int feat_channels, uint64_t seed);
Tensor embed_image(const Tensor& img, const FrozenEncoder& enc, const Linear& proj);

}  // namespace ratgan
