#include "ratgan/optim.hpp"

#include "ratgan/errors.hpp"

#include <cmath>
#include <string>

namespace ratgan {

AdamState make_adam_state(const ParamList& params) {
  AdamState st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const NamedParam& p : params) {
    st.m.emplace_back(p.tensor.data().size(), 0.0);
    st.v.emplace_back(p.tensor.data().size(), 0.0);
  }
  return st;
}

void adam_step(ParamList& params, const std::vector<std::vector<double>>& grads,
               AdamState& state, const AdamHyper& hp) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw UsageError("adam_step: parameter / gradient / state count mismatch");
  }
  state.t += 1;
  const double corr1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    std::vector<double>& w = params[i].tensor.mutable_data();
    const std::vector<double>& g = grads[i];
    if (g.size() != w.size()) {
      throw UsageError("adam_step: gradient size mismatch for '" + params[i].name + "'");
    }
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    for (size_t k = 0; k < w.size(); ++k) {
      if (!std::isfinite(g[k])) {
        throw NumericError("adam_step: non-finite gradient for '" + params[i].name +
                           "' at step " + std::to_string(state.t) + "; aborting");
      }
      m[k] = hp.beta1 * m[k] + (1.0 - hp.beta1) * g[k];
      v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * g[k] * g[k];
      const double mhat = m[k] / corr1;
      const double vhat = v[k] / corr2;
      w[k] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
  }
}

std::vector<std::vector<double>> collect_grads(const ParamList& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const NamedParam& p : params) {
    if (p.tensor.has_grad()) {
      out.push_back(p.tensor.grad());
    } else {
      out.emplace_back(p.tensor.data().size(), 0.0);
    }
  }
  return out;
}

void zero_all_grads(ParamList& params) {
  for (NamedParam& p : params) p.tensor.zero_grad();
}

}  // namespace ratgan
