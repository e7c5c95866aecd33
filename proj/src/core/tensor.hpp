#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace amen::ad {

// Dense row-major tensor. Gradient storage is allocated lazily when the
// tensor participates in a differentiable graph.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<int> shape_in, bool requires_grad_in);

  std::vector<int> shape;
  std::vector<double> v;
  std::vector<double> g;
  bool requires_grad = false;

  int size() const { return static_cast<int>(v.size()); }
  int rows() const;
  int cols() const;
  double& at(int r, int c);
  double at(int r, int c) const;
  void zero_grad();
};

using TensorRef = std::shared_ptr<Tensor>;

int numel(const std::vector<int>& shape);

TensorRef make_param(std::vector<int> shape);
TensorRef make_const(std::vector<int> shape, std::vector<double> values);
TensorRef make_zeros(std::vector<int> shape);

// Records one forward pass; execution order is a topological order of the
// graph, so running the closures in reverse visits every node after all of
// its consumers.
class Tape {
 public:
  Tape() = default;
  explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}

  TensorRef matmul(const TensorRef& a, const TensorRef& b);
  // matmul with b transposed: a[m×k] · b[n×k]^T -> [m×n]
  TensorRef matmul_nt(const TensorRef& a, const TensorRef& b);
  TensorRef softmax(const TensorRef& x, int axis);
  TensorRef add(const TensorRef& a, const TensorRef& b);
  TensorRef mul(const TensorRef& a, const TensorRef& b);
  // a*x + b, elementwise with scalar coefficients
  TensorRef affine(const TensorRef& x, double a, double b);
  TensorRef concat(std::span<const TensorRef> parts, int axis);
  TensorRef sigmoid(const TensorRef& x);
  TensorRef relu(const TensorRef& x);
  TensorRef log(const TensorRef& x);
  TensorRef abs(const TensorRef& x);
  TensorRef clamp(const TensorRef& x, double lo, double hi);
  TensorRef sum(const TensorRef& x);
  TensorRef sum_of(std::span<const TensorRef> scalars);
  // sum of the selected rows of a [V×d] table -> [1×d]
  TensorRef gather_sum(const TensorRef& table, std::span<const int> row_ids);

  void backward(const TensorRef& scalar_out);
  void clear();
  std::size_t node_count() const { return ops_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

 private:
  TensorRef out_like(std::vector<int> shape, bool needs_grad);
  void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

  std::vector<std::function<void()>> ops_;
  bool grad_enabled_ = true;
};

}  // namespace amen::ad
