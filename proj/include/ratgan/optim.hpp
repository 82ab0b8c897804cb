#pragma once

#include "ratgan/layers.hpp"

#include <cstdint>
#include <vector>

namespace ratgan {

// First/second moment buffers parallel to one parameter list, plus the count
// of completed steps (drives bias correction).
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  int64_t t = 0;
};

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double eps = 1e-8;
};

// Zero-initialized moments sized to the given parameters.
AdamState make_adam_state(const ParamList& params);

// One bias-corrected Adam update in place:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2,  t <- t+1
//   p <- p - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
// grads[i] must match params[i] element count; a non-finite gradient aborts
// with the parameter's name (NumericError).
void adam_step(ParamList& params, const std::vector<std::vector<double>>& grads,
               AdamState& state, const AdamHyper& hp);

// Gradients accumulated on the parameter tensors, zeros where none were set.
std::vector<std::vector<double>> collect_grads(const ParamList& params);

void zero_all_grads(ParamList& params);

}  // namespace ratgan
