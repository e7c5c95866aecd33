#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace amen::ad {

namespace {

std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape != b.shape) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape) + " vs " + shape_str(b.shape));
  }
}

}  // namespace

int numel(const std::vector<int>& shape) {
  int n = 1;
  for (int e : shape) {
    if (e <= 0) throw std::invalid_argument("non-positive extent in shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape_in, bool requires_grad_in)
    : shape(std::move(shape_in)), requires_grad(requires_grad_in) {
  v.assign(numel(shape), 0.0);
  if (requires_grad) g.assign(v.size(), 0.0);
}

int Tensor::rows() const {
  if (shape.size() != 2) throw std::invalid_argument("rows(): tensor is not 2-d");
  return shape[0];
}

int Tensor::cols() const {
  if (shape.size() != 2) throw std::invalid_argument("cols(): tensor is not 2-d");
  return shape[1];
}

double& Tensor::at(int r, int c) { return v[static_cast<std::size_t>(r) * cols() + c]; }
double Tensor::at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols() + c]; }

void Tensor::zero_grad() {
  if (requires_grad) std::fill(g.begin(), g.end(), 0.0);
}

TensorRef make_param(std::vector<int> shape) {
  return std::make_shared<Tensor>(std::move(shape), true);
}

TensorRef make_const(std::vector<int> shape, std::vector<double> values) {
  auto t = std::make_shared<Tensor>(std::move(shape), false);
  if (static_cast<int>(values.size()) != t->size()) {
    throw std::invalid_argument("make_const: value count does not match shape");
  }
  t->v = std::move(values);
  return t;
}

TensorRef make_zeros(std::vector<int> shape) {
  return std::make_shared<Tensor>(std::move(shape), false);
}

TensorRef Tape::out_like(std::vector<int> shape, bool needs_grad) {
  return std::make_shared<Tensor>(std::move(shape), needs_grad && grad_enabled_);
}

TensorRef Tape::matmul(const TensorRef& a, const TensorRef& b) {
  if (a->shape.size() != 2 || b->shape.size() != 2 || a->cols() != b->rows()) {
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a->shape) +
                                " and " + shape_str(b->shape));
  }
  const int m = a->rows(), k = a->cols(), n = b->cols();
  auto out = out_like({m, n}, a->requires_grad || b->requires_grad);
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double av = a->at(i, p);
      if (av == 0.0) continue;
      for (int j = 0; j < n; ++j) out->at(i, j) += av * b->at(p, j);
    }
  }
  if (out->requires_grad) {
    record([a, b, out, m, k, n] {
      if (a->requires_grad) {
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            const double gv = out->g[static_cast<std::size_t>(i) * n + j];
            if (gv == 0.0) continue;
            for (int p = 0; p < k; ++p)
              a->g[static_cast<std::size_t>(i) * k + p] += gv * b->at(p, j);
          }
      }
      if (b->requires_grad) {
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            const double gv = out->g[static_cast<std::size_t>(i) * n + j];
            if (gv == 0.0) continue;
            for (int p = 0; p < k; ++p)
              b->g[static_cast<std::size_t>(p) * n + j] += gv * a->at(i, p);
          }
      }
    });
  }
  return out;
}

TensorRef Tape::matmul_nt(const TensorRef& a, const TensorRef& b) {
  if (a->shape.size() != 2 || b->shape.size() != 2 || a->cols() != b->cols()) {
    throw std::invalid_argument("matmul_nt: incompatible shapes " + shape_str(a->shape) +
                                " and " + shape_str(b->shape));
  }
  const int m = a->rows(), k = a->cols(), n = b->rows();
  auto out = out_like({m, n}, a->requires_grad || b->requires_grad);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += a->at(i, p) * b->at(j, p);
      out->at(i, j) = acc;
    }
  if (out->requires_grad) {
    record([a, b, out, m, k, n] {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double gv = out->g[static_cast<std::size_t>(i) * n + j];
          if (gv == 0.0) continue;
          if (a->requires_grad)
            for (int p = 0; p < k; ++p)
              a->g[static_cast<std::size_t>(i) * k + p] += gv * b->at(j, p);
          if (b->requires_grad)
            for (int p = 0; p < k; ++p)
              b->g[static_cast<std::size_t>(j) * k + p] += gv * a->at(i, p);
        }
    });
  }
  return out;
}

TensorRef Tape::softmax(const TensorRef& x, int axis) {
  const int nd = static_cast<int>(x->shape.size());
  if (axis < 0) axis += nd;
  if (axis < 0 || axis >= nd) throw std::invalid_argument("softmax: axis out of range");
  int outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= x->shape[i];
  for (int i = axis + 1; i < nd; ++i) inner *= x->shape[i];
  const int n = x->shape[axis];
  auto out = out_like(x->shape, x->requires_grad);
  for (int o = 0; o < outer; ++o)
    for (int in = 0; in < inner; ++in) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        mx = std::max(mx, x->v[(static_cast<std::size_t>(o) * n + j) * inner + in]);
      double z = 0.0;
      for (int j = 0; j < n; ++j) {
        const std::size_t idx = (static_cast<std::size_t>(o) * n + j) * inner + in;
        out->v[idx] = std::exp(x->v[idx] - mx);
        z += out->v[idx];
      }
      for (int j = 0; j < n; ++j)
        out->v[(static_cast<std::size_t>(o) * n + j) * inner + in] /= z;
    }
  if (out->requires_grad) {
    record([x, out, outer, inner, n] {
      for (int o = 0; o < outer; ++o)
        for (int in = 0; in < inner; ++in) {
          double dot = 0.0;
          for (int j = 0; j < n; ++j) {
            const std::size_t idx = (static_cast<std::size_t>(o) * n + j) * inner + in;
            dot += out->g[idx] * out->v[idx];
          }
          for (int j = 0; j < n; ++j) {
            const std::size_t idx = (static_cast<std::size_t>(o) * n + j) * inner + in;
            x->g[idx] += out->v[idx] * (out->g[idx] - dot);
          }
        }
    });
  }
  return out;
}

TensorRef Tape::add(const TensorRef& a, const TensorRef& b) {
  check_same_shape(*a, *b, "add");
  auto out = out_like(a->shape, a->requires_grad || b->requires_grad);
  for (int i = 0; i < out->size(); ++i) out->v[i] = a->v[i] + b->v[i];
  if (out->requires_grad) {
    record([a, b, out] {
      if (a->requires_grad)
        for (int i = 0; i < out->size(); ++i) a->g[i] += out->g[i];
      if (b->requires_grad)
        for (int i = 0; i < out->size(); ++i) b->g[i] += out->g[i];
    });
  }
  return out;
}

TensorRef Tape::mul(const TensorRef& a, const TensorRef& b) {
  check_same_shape(*a, *b, "mul");
  auto out = out_like(a->shape, a->requires_grad || b->requires_grad);
  for (int i = 0; i < out->size(); ++i) out->v[i] = a->v[i] * b->v[i];
  if (out->requires_grad) {
    record([a, b, out] {
      if (a->requires_grad)
        for (int i = 0; i < out->size(); ++i) a->g[i] += out->g[i] * b->v[i];
      if (b->requires_grad)
        for (int i = 0; i < out->size(); ++i) b->g[i] += out->g[i] * a->v[i];
    });
  }
  return out;
}

TensorRef Tape::affine(const TensorRef& x, double a, double b) {
  auto out = out_like(x->shape, x->requires_grad);
  for (int i = 0; i < out->size(); ++i) out->v[i] = a * x->v[i] + b;
  if (out->requires_grad) {
    record([x, out, a] {
      for (int i = 0; i < out->size(); ++i) x->g[i] += a * out->g[i];
    });
  }
  return out;
}

TensorRef Tape::concat(std::span<const TensorRef> parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const auto& first = parts.front()->shape;
  const int nd = static_cast<int>(first.size());
  if (axis < 0) axis += nd;
  if (axis < 0 || axis >= nd) throw std::invalid_argument("concat: axis out of range");
  int ax_total = 0;
  bool needs_grad = false;
  for (const auto& p : parts) {
    if (static_cast<int>(p->shape.size()) != nd)
      throw std::invalid_argument("concat: rank mismatch");
    for (int i = 0; i < nd; ++i)
      if (i != axis && p->shape[i] != first[i])
        throw std::invalid_argument("concat: shape mismatch " + shape_str(p->shape) +
                                    " vs " + shape_str(first));
    ax_total += p->shape[axis];
    needs_grad = needs_grad || p->requires_grad;
  }
  std::vector<int> out_shape = first;
  out_shape[axis] = ax_total;
  auto out = out_like(out_shape, needs_grad);
  int outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= first[i];
  for (int i = axis + 1; i < nd; ++i) inner *= first[i];
  int offset = 0;
  for (const auto& p : parts) {
    const int pa = p->shape[axis];
    for (int o = 0; o < outer; ++o)
      for (int j = 0; j < pa; ++j)
        std::copy_n(&p->v[(static_cast<std::size_t>(o) * pa + j) * inner], inner,
                    &out->v[(static_cast<std::size_t>(o) * ax_total + offset + j) * inner]);
    offset += pa;
  }
  if (out->requires_grad) {
    std::vector<TensorRef> held(parts.begin(), parts.end());
    record([held = std::move(held), out, outer, inner, ax_total, axis] {
      int off = 0;
      for (const auto& p : held) {
        const int pa = p->shape[axis];
        if (p->requires_grad)
          for (int o = 0; o < outer; ++o)
            for (int j = 0; j < pa; ++j) {
              const double* src =
                  &out->g[(static_cast<std::size_t>(o) * ax_total + off + j) * inner];
              double* dst = &p->g[(static_cast<std::size_t>(o) * pa + j) * inner];
              for (int i = 0; i < inner; ++i) dst[i] += src[i];
            }
        off += pa;
      }
    });
  }
  return out;
}

TensorRef Tape::sigmoid(const TensorRef& x) {
  auto out = out_like(x->shape, x->requires_grad);
  for (int i = 0; i < out->size(); ++i) {
    const double xv = x->v[i];
    out->v[i] = xv >= 0.0 ? 1.0 / (1.0 + std::exp(-xv))
                          : std::exp(xv) / (1.0 + std::exp(xv));
  }
  if (out->requires_grad) {
    record([x, out] {
      for (int i = 0; i < out->size(); ++i)
        x->g[i] += out->g[i] * out->v[i] * (1.0 - out->v[i]);
    });
  }
  return out;
}

TensorRef Tape::relu(const TensorRef& x) {
  auto out = out_like(x->shape, x->requires_grad);
  for (int i = 0; i < out->size(); ++i) out->v[i] = x->v[i] > 0.0 ? x->v[i] : 0.0;
  if (out->requires_grad) {
    record([x, out] {
      for (int i = 0; i < out->size(); ++i)
        if (x->v[i] > 0.0) x->g[i] += out->g[i];
    });
  }
  return out;
}

TensorRef Tape::log(const TensorRef& x) {
  auto out = out_like(x->shape, x->requires_grad);
  for (int i = 0; i < out->size(); ++i) {
    if (x->v[i] <= 0.0)
      throw std::domain_error("log: non-positive input " + std::to_string(x->v[i]));
    out->v[i] = std::log(x->v[i]);
  }
  if (out->requires_grad) {
    record([x, out] {
      for (int i = 0; i < out->size(); ++i) x->g[i] += out->g[i] / x->v[i];
    });
  }
  return out;
}

TensorRef Tape::abs(const TensorRef& x) {
  auto out = out_like(x->shape, x->requires_grad);
  for (int i = 0; i < out->size(); ++i) out->v[i] = std::fabs(x->v[i]);
  if (out->requires_grad) {
    record([x, out] {
      for (int i = 0; i < out->size(); ++i) {
        if (x->v[i] > 0.0)
          x->g[i] += out->g[i];
        else if (x->v[i] < 0.0)
          x->g[i] -= out->g[i];
      }
    });
  }
  return out;
}

TensorRef Tape::clamp(const TensorRef& x, double lo, double hi) {
  auto out = out_like(x->shape, x->requires_grad);
  for (int i = 0; i < out->size(); ++i) out->v[i] = std::clamp(x->v[i], lo, hi);
  if (out->requires_grad) {
    record([x, out, lo, hi] {
      for (int i = 0; i < out->size(); ++i)
        if (x->v[i] > lo && x->v[i] < hi) x->g[i] += out->g[i];
    });
  }
  return out;
}

TensorRef Tape::sum(const TensorRef& x) {
  auto out = out_like({1}, x->requires_grad);
  out->v[0] = std::accumulate(x->v.begin(), x->v.end(), 0.0);
  if (out->requires_grad) {
    record([x, out] {
      for (int i = 0; i < x->size(); ++i) x->g[i] += out->g[0];
    });
  }
  return out;
}

TensorRef Tape::sum_of(std::span<const TensorRef> scalars) {
  if (scalars.empty()) throw std::invalid_argument("sum_of: no inputs");
  bool needs_grad = false;
  double acc = 0.0;
  for (const auto& s : scalars) {
    if (s->size() != 1) throw std::invalid_argument("sum_of: non-scalar input");
    acc += s->v[0];
    needs_grad = needs_grad || s->requires_grad;
  }
  auto out = out_like({1}, needs_grad);
  out->v[0] = acc;
  if (out->requires_grad) {
    std::vector<TensorRef> held(scalars.begin(), scalars.end());
    record([held = std::move(held), out] {
      for (const auto& s : held)
        if (s->requires_grad) s->g[0] += out->g[0];
    });
  }
  return out;
}

TensorRef Tape::gather_sum(const TensorRef& table, std::span<const int> row_ids) {
  if (table->shape.size() != 2) throw std::invalid_argument("gather_sum: table must be 2-d");
  const int vocab = table->rows(), d = table->cols();
  for (int id : row_ids) {
    if (id < 0 || id >= vocab)
      throw std::out_of_range("gather_sum: id " + std::to_string(id) +
                              " outside vocabulary of size " + std::to_string(vocab));
  }
  auto out = out_like({1, d}, table->requires_grad);
  for (int id : row_ids)
    for (int j = 0; j < d; ++j) out->v[j] += table->at(id, j);
  if (out->requires_grad) {
    std::vector<int> ids(row_ids.begin(), row_ids.end());
    record([table, out, ids = std::move(ids), d] {
      for (int id : ids)
        for (int j = 0; j < d; ++j)
          table->g[static_cast<std::size_t>(id) * d + j] += out->g[j];
    });
  }
  return out;
}

void Tape::backward(const TensorRef& scalar_out) {
  if (scalar_out->size() != 1)
    throw std::invalid_argument("backward: output must be scalar");
  if (!scalar_out->requires_grad)
    throw std::invalid_argument("backward: output does not require grad");
  scalar_out->g[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

void Tape::clear() { ops_.clear(); }

}  // namespace amen::ad
