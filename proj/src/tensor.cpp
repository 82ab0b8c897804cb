#include "ratgan/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace ratgan {

namespace {

thread_local Tape* g_current_tape = nullptr;
thread_local int g_nograd_depth = 0;

}  // namespace

int64_t shape_numel(const std::vector<int>& shape) {
  int64_t n = 1;
  for (const int d : shape) {
    if (d <= 0) throw ShapeError("non-positive extent in shape " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void check_finite(const char* op, const std::vector<double>& data) {
  for (const double v : data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite value produced");
    }
  }
}

Tensor make_tensor(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  const int64_t n = shape_numel(shape);
  return make_tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0),
                     requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  const int64_t n = shape_numel(shape);
  if (!std::isfinite(value)) throw NumericError("full: non-finite fill value");
  return make_tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), value),
                     requires_grad);
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
  const int64_t n = shape_numel(shape);
  if (n != static_cast<int64_t>(data.size())) {
    throw ShapeError("from_data: " + std::to_string(data.size()) +
                     " values for shape " + shape_to_string(shape));
  }
  check_finite("from_data", data);
  return make_tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

double Tensor::value() const {
  if (!n_ || n_->data.size() != 1) {
    throw UsageError("value: tensor is not a scalar");
  }
  return n_->data[0];
}

Tensor Tensor::detach() const {
  return make_tensor(n_->shape, n_->data, false);
}

const std::vector<double>& Tensor::grad() const {
  if (!has_grad()) throw UsageError("grad: no gradient accumulated for this tensor");
  return n_->grad;
}

std::string Tensor::shape_str() const { return shape_to_string(n_->shape); }

// ---- Tape ----

Tape::Tape() : core_(std::make_shared<detail::TapeCore>()), prev_(g_current_tape) {
  g_current_tape = this;
}

Tape::~Tape() { g_current_tape = prev_; }

Tape* Tape::current() { return g_current_tape; }

bool Tape::recording_enabled() { return g_nograd_depth == 0; }

NoGradGuard::NoGradGuard() { ++g_nograd_depth; }
NoGradGuard::~NoGradGuard() { --g_nograd_depth; }

Tensor record_op(const char* op, std::vector<int> shape, std::vector<double> data,
                 std::vector<Tensor> inputs, VjpFn vjp) {
  if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
    throw ShapeError(std::string(op) + ": output buffer does not match shape " +
                     shape_to_string(shape));
  }
  check_finite(op, data);

  bool any_grad = false;
  for (const Tensor& in : inputs) {
    if (in.requires_grad()) {
      any_grad = true;
      break;
    }
  }

  Tensor out = make_tensor(std::move(shape), std::move(data), false);
  Tape* tape = Tape::current();
  if (any_grad && tape && Tape::recording_enabled()) {
    detail::Node* node = out.node();
    node->requires_grad = true;
    node->tape = tape->core_;
    node->entry = static_cast<int>(tape->core_->entries.size());
    tape->core_->entries.push_back(
        detail::TapeEntry{op, std::move(inputs), out, std::move(vjp)});
  }
  return out;
}

namespace {

// Shared reverse walk. Returns the pending-gradient map keyed by node.
// Assumes root is a scalar recorded on `core`. The caller controls whether a
// second-order graph is built: wrap the call in NoGradGuard to disable it.
Tensor add_plain(const Tensor& a, const Tensor& b);

std::unordered_map<detail::Node*, Tensor> reverse_walk(
    const std::shared_ptr<detail::TapeCore>& core, const Tensor& root) {
  std::unordered_map<detail::Node*, Tensor> pending;
  pending.emplace(root.node(), Tensor::scalar(1.0));

  const int root_entry = root.node()->entry;
  for (int e = root_entry; e >= 0; --e) {
    // Copy the entry: vjps may record fresh ops onto this same tape (second-
    // order mode), and the push_back can reallocate the entries vector.
    const detail::TapeEntry entry = core->entries[static_cast<size_t>(e)];
    auto it = pending.find(entry.output.node());
    if (it == pending.end()) continue;
    const Tensor out_grad = it->second;

    std::vector<bool> needs(entry.inputs.size());
    for (size_t i = 0; i < entry.inputs.size(); ++i) {
      needs[i] = entry.inputs[i].requires_grad();
    }

    std::vector<Tensor> input_grads = entry.vjp(out_grad, needs);
    if (input_grads.size() != entry.inputs.size()) {
      throw UsageError(std::string(entry.op) + ": vjp returned wrong arity");
    }
    for (size_t i = 0; i < entry.inputs.size(); ++i) {
      if (!needs[i] || !input_grads[i].defined()) continue;
      detail::Node* in_node = entry.inputs[i].node();
      auto slot = pending.find(in_node);
      if (slot == pending.end()) {
        pending.emplace(in_node, input_grads[i]);
      } else {
        slot->second = add_plain(slot->second, input_grads[i]);
      }
    }
  }
  return pending;
}

// Addition used by the engine itself; recorded like any other op so that
// create_graph walks stay differentiable.
Tensor add_plain(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("grad accumulate: " + a.shape_str() + " vs " + b.shape_str());
  }
  std::vector<double> out(a.data());
  const auto& bd = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return record_op("add", a.shape(), std::move(out), {a, b},
                   [](const Tensor& g, const std::vector<bool>&) {
                     return std::vector<Tensor>{g, g};
                   });
}

void require_scalar_root(const Tensor& root, const char* who) {
  if (!root.defined() || root.size() != 1) {
    throw UsageError(std::string(who) + ": root must be a scalar tensor");
  }
}

}  // namespace

void backward(const Tensor& root) {
  require_scalar_root(root, "backward");
  auto core = root.node()->tape.lock();
  if (!core || root.node()->entry < 0) {
    throw UsageError("backward: root was not produced on a live tape");
  }
  NoGradGuard nograd;
  auto pending = reverse_walk(core, root);
  for (auto& [node, g] : pending) {
    if (!node->requires_grad) continue;
    if (node->grad.empty()) node->grad.assign(node->data.size(), 0.0);
    const auto& gd = g.data();
    for (size_t i = 0; i < gd.size(); ++i) node->grad[i] += gd[i];
  }
}

std::vector<Tensor> take_grad(const Tensor& root, const std::vector<Tensor>& inputs,
                              bool create_graph) {
  require_scalar_root(root, "take_grad");
  auto core = root.node()->tape.lock();
  std::unordered_map<detail::Node*, Tensor> pending;
  if (core && root.node()->entry >= 0) {
    if (create_graph) {
      pending = reverse_walk(core, root);
    } else {
      NoGradGuard nograd;
      pending = reverse_walk(core, root);
    }
  }
  std::vector<Tensor> out;
  out.reserve(inputs.size());
  for (const Tensor& in : inputs) {
    auto it = pending.find(in.node());
    if (it == pending.end()) {
      out.push_back(Tensor::zeros(in.shape()));
    } else {
      out.push_back(it->second);
    }
  }
  return out;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double step) {
  if (step <= 0.0) throw UsageError("grad_check: step must be positive");

  Tensor probe = x.detach();
  probe.set_requires_grad(true);
  std::vector<double> analytic(static_cast<size_t>(probe.size()), 0.0);
  {
    Tape tape;
    Tensor y = f(probe);
    if (y.size() != 1) throw UsageError("grad_check: f must be scalar-valued");
    if (!std::isfinite(y.value())) throw NumericError("grad_check: non-finite f(x)");
    if (y.requires_grad()) {
      backward(y);
      if (probe.has_grad()) analytic = probe.grad();
    }
  }

  double worst = 0.0;
  NoGradGuard nograd;
  for (int64_t i = 0; i < probe.size(); ++i) {
    Tensor xp = x.detach();
    Tensor xm = x.detach();
    xp.mutable_data()[static_cast<size_t>(i)] += step;
    xm.mutable_data()[static_cast<size_t>(i)] -= step;
    const double fp = f(xp).value();
    const double fm = f(xm).value();
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("grad_check: non-finite f at probe point");
    }
    const double numeric = (fp - fm) / (2.0 * step);
    const double a = analytic[static_cast<size_t>(i)];
    const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
    worst = std::max(worst, std::fabs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace ratgan
