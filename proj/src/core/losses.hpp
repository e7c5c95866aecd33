#pragma once

#include <span>
#include <vector>

#include "tensor.hpp"

namespace amen::loss {

inline constexpr double kProbClamp = 1e-12;

struct BatchLoss {
  double ce = 0.0;
  double bpr = 0.0;
  double total = 0.0;
  long matched_count = 0;
};

struct PairEval {
  double r = 0.0;
  double r_diff = 0.0;
  int y_diff = 0;
};

// scalar forms, used directly by metrics and as the test oracle surface

double cross_entropy(double y_hat, int y);
double cross_entropy_batch(std::span<const double> y_hat, std::span<const int> y);
int direction_alignment(int y_diff);  // {0,1} -> {-1,+1}
double bpr_loss(std::span<const PairEval> pairs);
double total_loss(double ce, double bpr, double w1, double w2);

// graph forms, composed on a tape during training

ad::TensorRef ce_term(ad::Tape& tape, const ad::TensorRef& y_hat, int y);
ad::TensorRef bpr_term(ad::Tape& tape, const ad::TensorRef& r, const ad::TensorRef& r_diff,
                       int y_diff);
// w1 * mean(ce_terms) + w2 * (-1/M) * sum(bpr_log_terms); bpr contributes 0
// when no pairs matched
ad::TensorRef fuse(ad::Tape& tape, std::span<const ad::TensorRef> ce_terms,
                   std::span<const ad::TensorRef> bpr_log_terms, double w1, double w2,
                   BatchLoss* out = nullptr);

}  // namespace amen::loss
