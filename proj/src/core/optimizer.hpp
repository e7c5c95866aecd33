#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "tensor.hpp"

namespace amen::ad {

struct AdaGradConfig {
  double lr = 0.001;
  double eps = 1e-8;
  // optional extra multiplicative decay per step; 1.0 = AdaGrad's intrinsic
  // accumulator decay only
  double lr_decay = 1.0;
};

class AdaGrad {
 public:
  explicit AdaGrad(AdaGradConfig cfg) : cfg_(cfg) {}

  // accumulator += grad^2; param -= lr * grad / (sqrt(accumulator) + eps)
  void step(std::span<const TensorRef> params);

  std::int64_t steps_taken() const { return steps_; }
  const std::vector<double>* accumulator(const TensorRef& p) const;

 private:
  AdaGradConfig cfg_;
  std::unordered_map<const Tensor*, std::vector<double>> accum_;
  std::int64_t steps_ = 0;
};

}  // namespace amen::ad
