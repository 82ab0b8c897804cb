#include "ratgan/losses.hpp"

#include <algorithm>
#include <cmath>

namespace ratgan {

void LossHyperparams::validate() const {
  if (k < 0.0) throw ConfigError("losses: penalty coefficient k must be >= 0");
  if (p < 1.0) throw ConfigError("losses: penalty exponent p must be >= 1");
  if (lambda < 0.0) throw ConfigError("losses: similarity weight lambda must be >= 0");
}

double hinge_d_terms(double score_real, double score_fake, double score_mis) {
  return -std::min(0.0, -1.0 + score_real) - 0.5 * std::min(0.0, -1.0 - score_fake) -
         0.5 * std::min(0.0, -1.0 - score_mis);
}

Tensor hinge_d_terms(const Tensor& score_real, const Tensor& score_fake,
                     const Tensor& score_mis) {
  // -min(0, -1+s) == relu(1-s) and -min(0, -1-s) == relu(1+s).
  Tensor real_term = relu(add_scalar(neg(score_real), 1.0));
  Tensor fake_term = relu(add_scalar(score_fake, 1.0));
  Tensor mis_term = relu(add_scalar(score_mis, 1.0));
  return add(real_term, scale(add(fake_term, mis_term), 0.5));
}

double generator_loss(double score_fake, double sim, const LossHyperparams& hp) {
  hp.validate();
  return -score_fake - hp.lambda * sim;
}

Tensor generator_loss(const Tensor& score_fake, const Tensor& sim,
                      const LossHyperparams& hp) {
  hp.validate();
  return neg(add(score_fake, scale(sim, hp.lambda)));
}

namespace {

void check_same_length(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: length mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

}  // namespace

double cosine_similarity(const Tensor& a, const Tensor& b) {
  check_same_length(a, b);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    ab += a.data()[i] * b.data()[i];
    aa += a.data()[i] * a.data()[i];
    bb += b.data()[i] * b.data()[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    throw NumericError("cosine_similarity: zero vector has no direction");
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

Tensor cosine_similarity_graph(const Tensor& a, const Tensor& b) {
  check_same_length(a, b);
  const Tensor na = l2_norm(a);
  const Tensor nb = l2_norm(b);
  if (na.value() == 0.0 || nb.value() == 0.0) {
    throw NumericError("cosine_similarity: zero vector has no direction");
  }
  return mul(dot(reshape(a, {static_cast<int>(a.size())}),
                 reshape(b, {static_cast<int>(b.size())})),
             reciprocal(mul(na, nb)));
}

Tensor gradient_penalty_term(const FeatureScoreFn& score_fn, const Tensor& feats,
                             const Tensor& t, const LossHyperparams& hp) {
  hp.validate();
  Tensor feat_leaf = feats.detach();
  feat_leaf.set_requires_grad(true);
  Tensor t_leaf = t.detach();
  t_leaf.set_requires_grad(true);
  Tensor score = score_fn(feat_leaf, t_leaf);
  std::vector<Tensor> grads = take_grad(score, {feat_leaf, t_leaf}, /*create_graph=*/true);
  for (const Tensor& g : grads) {
    for (const double v : g.data()) {
      if (!std::isfinite(v)) {
        throw NumericError("gradient_penalty: non-finite gradient; aborting training");
      }
    }
  }
  Tensor norm_sum = add(l2_norm(grads[0]), l2_norm(grads[1]));
  return scale(pow_elem(norm_sum, hp.p), hp.k);
}

double gradient_penalty(const Tensor& img, const Tensor& t, const FrozenEncoder& enc,
                        const DiscriminatorWeights& w, const LossHyperparams& hp) {
  Tape tape;
  Tensor feats;
  {
    NoGradGuard guard;
    feats = frozen_encode(img, enc);
  }
  const FeatureScoreFn score_fn = [&w](const Tensor& f, const Tensor& s) {
    return referee_score(fe_extract(f, w.fe), s, w.referee);
  };
  return gradient_penalty_term(score_fn, feats, t, hp).value();
}

Linear make_similarity_projection(int sentence_dim, int feat_channels, uint64_t seed) {
  if (sentence_dim < 1 || feat_channels < 1) {
    throw ConfigError("similarity projection: dimensions must be >= 1");
  }
  Rng rng(seed);
  std::vector<double> data(static_cast<size_t>(sentence_dim) * feat_channels);
  for (double& v : data) v = rng.normal(0.0, 0.05);
  Linear proj;
  proj.w = Tensor::from_data({sentence_dim, feat_channels}, std::move(data));
  proj.b = Tensor::zeros({sentence_dim});
  return proj;
}

Tensor embed_image(const Tensor& img, const FrozenEncoder& enc, const Linear& proj) {
  return linear_forward(proj, global_avg_pool(frozen_encode(img, enc)));
}

}  // namespace ratgan
