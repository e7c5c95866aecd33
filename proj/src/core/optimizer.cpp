#include "optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace amen::ad {

void AdaGrad::step(std::span<const TensorRef> params) {
  const double lr = cfg_.lr * std::pow(cfg_.lr_decay, static_cast<double>(steps_));
  for (const auto& p : params) {
    if (!p->requires_grad)
      throw std::invalid_argument("AdaGrad::step: parameter without gradient storage");
    auto& acc = accum_[p.get()];
    if (acc.empty()) acc.assign(p->v.size(), 0.0);
    for (std::size_t i = 0; i < p->v.size(); ++i) {
      const double gr = p->g[i];
      acc[i] += gr * gr;
      p->v[i] -= lr * gr / (std::sqrt(acc[i]) + cfg_.eps);
    }
  }
  ++steps_;
}

const std::vector<double>* AdaGrad::accumulator(const TensorRef& p) const {
  auto it = accum_.find(p.get());
  return it == accum_.end() ? nullptr : &it->second;
}

}  // namespace amen::ad
