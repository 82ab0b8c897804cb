#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ratgan/errors.hpp"

namespace ratgan {

class Tensor;
class Tape;

namespace detail {

struct TapeCore;

struct Node {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::weak_ptr<TapeCore> tape;  // tape that produced this node, if any
  int entry = -1;                // producing entry index on that tape
};

}  // namespace detail

// Dense row-major tensor of 64-bit floats, the universal value type. A
// Tensor is a cheap shared handle; data is treated as immutable once an op
// has produced it (the optimizer mutates leaf parameters between tapes).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(n_); }
  const std::vector<int>& shape() const { return n_->shape; }
  int64_t size() const { return static_cast<int64_t>(n_->data.size()); }
  int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(n_->shape.size()); }

  const std::vector<double>& data() const { return n_->data; }
  std::vector<double>& mutable_data() { return n_->data; }
  double operator[](int64_t i) const { return n_->data[static_cast<size_t>(i)]; }

  // Scalar extraction; UsageError unless size()==1.
  double value() const;

  bool requires_grad() const { return n_ && n_->requires_grad; }
  Tensor& set_requires_grad(bool rg) {
    n_->requires_grad = rg;
    return *this;
  }

  // Fresh node with copied data, detached from any tape, grad not required.
  Tensor detach() const;

  bool has_grad() const { return n_ && !n_->grad.empty(); }
  const std::vector<double>& grad() const;
  void zero_grad() { n_->grad.assign(n_->data.size(), 0.0); }

  detail::Node* node() const { return n_.get(); }

  bool same_shape(const Tensor& other) const { return n_->shape == other.n_->shape; }
  std::string shape_str() const;

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : n_(std::move(n)) {}
  std::shared_ptr<detail::Node> n_;

  friend Tensor make_tensor(std::vector<int>, std::vector<double>, bool);
};

int64_t shape_numel(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

// Vector-Jacobian product: given d(root)/d(output), produce d(root)/d(input)
// for each input. `needs[i]` is false when input i's gradient is not wanted;
// the vjp may leave that slot default-constructed.
using VjpFn = std::function<std::vector<Tensor>(const Tensor& out_grad,
                                                const std::vector<bool>& needs)>;

namespace detail {

struct TapeEntry {
  const char* op;
  std::vector<Tensor> inputs;
  Tensor output;
  VjpFn vjp;
};

struct TapeCore {
  std::vector<TapeEntry> entries;
};

}  // namespace detail

// Ordered record of executed differentiable operations. Ops record onto the
// innermost live Tape of the current thread; one tape per worker.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  size_t size() const { return core_->entries.size(); }

  static Tape* current();
  static bool recording_enabled();

 private:
  std::shared_ptr<detail::TapeCore> core_;
  Tape* prev_;

  friend Tensor record_op(const char*, std::vector<int>, std::vector<double>,
                          std::vector<Tensor>, VjpFn);
  friend void backward(const Tensor&);
  friend std::vector<Tensor> take_grad(const Tensor&, const std::vector<Tensor>&, bool);
};

// Suspends recording (and gradient requirements on new outputs) while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

// Core recording helper used by every differentiable op. Verifies the output
// is finite, wraps it in a node, and records a tape entry when recording is
// live and some input requires grad.
Tensor record_op(const char* op, std::vector<int> shape, std::vector<double> data,
                 std::vector<Tensor> inputs, VjpFn vjp);

// Accumulates d(root)/d(t) into t.grad for every requires_grad tensor
// reachable from root. Repeated calls without zero_grad accumulate.
void backward(const Tensor& root);

// Returns d(root)/d(inputs[i]) as tensors (zeros when unreachable). With
// create_graph the returned gradients are themselves recorded and can be
// differentiated again.
std::vector<Tensor> take_grad(const Tensor& root, const std::vector<Tensor>& inputs,
                              bool create_graph);

// Compares the analytic gradient of a scalar-valued f at x against central
// finite differences; returns the worst relative error with denominator
// max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double step);

void check_finite(const char* op, const std::vector<double>& data);

}  // namespace ratgan
