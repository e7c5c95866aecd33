#include "losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amen::loss {

using ad::TensorRef;

namespace {

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

double cross_entropy(double y_hat, int y) {
  const double p = std::clamp(y_hat, kProbClamp, 1.0 - kProbClamp);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double cross_entropy_batch(std::span<const double> y_hat, std::span<const int> y) {
  if (y_hat.size() != y.size())
    throw std::invalid_argument("cross_entropy_batch: size mismatch");
  if (y_hat.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < y_hat.size(); ++i) acc += cross_entropy(y_hat[i], y[i]);
  return acc / static_cast<double>(y_hat.size());
}

int direction_alignment(int y_diff) { return y_diff == 1 ? 1 : -1; }

double bpr_loss(std::span<const PairEval> pairs) {
  if (pairs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& p : pairs) {
    const double s =
        sigmoid(direction_alignment(p.y_diff) * (p.r_diff - p.r));
    acc += std::log(std::max(s, kProbClamp));
  }
  return -acc / static_cast<double>(pairs.size());
}

double total_loss(double ce, double bpr, double w1, double w2) {
  if (w1 < 0.0 || w2 < 0.0)
    throw std::invalid_argument("total_loss: negative loss weight");
  return w1 * ce + w2 * bpr;
}

TensorRef ce_term(ad::Tape& tape, const TensorRef& y_hat, int y) {
  auto p = tape.clamp(y_hat, kProbClamp, 1.0 - kProbClamp);
  if (y != 1) p = tape.affine(p, -1.0, 1.0);
  return tape.affine(tape.log(p), -1.0, 0.0);
}

TensorRef bpr_term(ad::Tape& tape, const TensorRef& r, const TensorRef& r_diff, int y_diff) {
  auto gap = tape.add(r_diff, tape.affine(r, -1.0, 0.0));
  auto s = tape.sigmoid(tape.affine(gap, direction_alignment(y_diff), 0.0));
  return tape.log(tape.clamp(s, kProbClamp, 1.0));
}

TensorRef fuse(ad::Tape& tape, std::span<const TensorRef> ce_terms,
               std::span<const TensorRef> bpr_log_terms, double w1, double w2,
               BatchLoss* out) {
  if (ce_terms.empty() && bpr_log_terms.empty())
    throw std::invalid_argument("fuse: empty batch");
  if (w1 < 0.0 || w2 < 0.0) throw std::invalid_argument("fuse: negative loss weight");
  TensorRef ce = ce_terms.empty()
                     ? ad::make_zeros({1})
                     : tape.affine(tape.sum_of(ce_terms), 1.0 / ce_terms.size(), 0.0);
  TensorRef bpr = bpr_log_terms.empty()
                      ? ad::make_zeros({1})
                      : tape.affine(tape.sum_of(bpr_log_terms),
                                    -1.0 / bpr_log_terms.size(), 0.0);
  auto total = tape.add(tape.affine(ce, w1, 0.0), tape.affine(bpr, w2, 0.0));
  if (out) {
    out->ce = ce->v[0];
    out->bpr = bpr->v[0];
    out->total = total->v[0];
    out->matched_count = static_cast<long>(bpr_log_terms.size());
  }
  return total;
}

}  // namespace amen::loss
