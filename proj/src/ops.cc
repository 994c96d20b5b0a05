// Copyright 2026 The SquadLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "squadlab/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "squadlab/rng.h"

namespace squadlab {
namespace {

using NodePtr = std::shared_ptr<detail::Node>;

bool needs_grad(std::initializer_list<const Tensor*> inputs) {
  if (!grad_enabled()) return false;
  for (const Tensor* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

// Wraps freshly computed values as an op output and records its backward
// rule when any input participates in differentiation.
Tensor make_result(Shape shape, std::vector<double> values, const char* op, bool track,
                   Tape::BackwardFn backward) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + " produced a non-finite value (output shape " +
                         shape_str(shape) + ")");
    }
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  if (track) {
    node->requires_grad = true;
    node->grad.assign(node->data.size(), 0.0);
    Tape::current().record(node, std::move(backward));
  }
  return Tensor(std::move(node));
}

bool tracks(const NodePtr& n) { return n && n->requires_grad; }

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("cannot broadcast shapes " + shape_str(a) + " and " + shape_str(b));
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// For each flat index of `out`, the flat index of `in` it reads from.
std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  const std::size_t rank = out.size();
  const std::size_t offset = rank - in.size();
  std::vector<std::size_t> in_stride(rank, 0);
  std::size_t stride = 1;
  for (std::size_t i = rank; i-- > offset;) {
    std::size_t d = in[i - offset];
    in_stride[i] = d == 1 ? 0 : stride;
    stride *= d;
  }
  const std::size_t n = shape_numel(out);
  std::vector<std::size_t> index(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t pos = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    index[flat] = pos;
    for (std::size_t i = rank; i-- > 0;) {
      ++counter[i];
      pos += in_stride[i];
      if (counter[i] < out[i]) break;
      pos -= in_stride[i] * counter[i];
      counter[i] = 0;
    }
  }
  return index;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

void check_axis(const Tensor& x, std::size_t axis, const char* op) {
  if (axis >= x.rank()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " invalid for shape " + shape_str(x.shape()));
  }
}

// (outer, length, inner) decomposition of a shape around `axis`.
struct AxisView {
  std::size_t outer = 1, length = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.length = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

}  // namespace

Tensor elementwise(OpKind kind, const Tensor& a, const Tensor& b) {
  NodePtr an = a.node();
  switch (kind) {
    case OpKind::kSigmoid:
    case OpKind::kTanh:
    case OpKind::kRelu: {
      std::vector<double> out(a.numel());
      const auto x = a.data();
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (kind == OpKind::kSigmoid) out[i] = stable_sigmoid(x[i]);
        else if (kind == OpKind::kTanh) out[i] = std::tanh(x[i]);
        else out[i] = x[i] > 0 ? x[i] : 0.0;
      }
      return make_result(a.shape(), std::move(out), "elementwise", needs_grad({&a}),
                         [an, kind](const detail::Node& o) {
                           for (std::size_t i = 0; i < o.grad.size(); ++i) {
                             double y = o.data[i];
                             double d = kind == OpKind::kSigmoid ? y * (1.0 - y)
                                        : kind == OpKind::kTanh  ? 1.0 - y * y
                                                                 : (an->data[i] > 0 ? 1.0 : 0.0);
                             an->grad[i] += o.grad[i] * d;
                           }
                         });
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
      break;
  }
  if (!b.defined()) throw ShapeError("binary elementwise op needs two operands");
  NodePtr bn = b.node();
  Shape shape = broadcast_shape(a.shape(), b.shape());
  const std::size_t n = shape_numel(shape);
  const bool a_same = a.shape() == shape;
  const bool b_same = b.shape() == shape;
  auto ia = std::make_shared<std::vector<std::size_t>>(a_same ? std::vector<std::size_t>{}
                                                              : broadcast_index(a.shape(), shape));
  auto ib = std::make_shared<std::vector<std::size_t>>(b_same ? std::vector<std::size_t>{}
                                                              : broadcast_index(b.shape(), shape));
  const auto& ad = an->data;
  const auto& bd = bn->data;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = ad[a_same ? i : (*ia)[i]];
    double y = bd[b_same ? i : (*ib)[i]];
    out[i] = kind == OpKind::kAdd ? x + y : kind == OpKind::kSub ? x - y : x * y;
  }
  return make_result(std::move(shape), std::move(out), "elementwise", needs_grad({&a, &b}),
                     [an, bn, ia, ib, a_same, b_same, kind](const detail::Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) {
                         const std::size_t ja = a_same ? i : (*ia)[i];
                         const std::size_t jb = b_same ? i : (*ib)[i];
                         const double g = o.grad[i];
                         if (tracks(an)) {
                           an->grad[ja] += kind == OpKind::kMul ? g * bn->data[jb] : g;
                         }
                         if (tracks(bn)) {
                           bn->grad[jb] += kind == OpKind::kMul   ? g * an->data[ja]
                                           : kind == OpKind::kSub ? -g
                                                                  : g;
                         }
                       }
                     });
}

Tensor scale(const Tensor& x, double factor) {
  NodePtr xn = x.node();
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  return make_result(x.shape(), std::move(out), "scale", needs_grad({&x}),
                     [xn, factor](const detail::Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) xn->grad[i] += o.grad[i] * factor;
                     });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if ((a.rank() != 2 && a.rank() != 3) || b.rank() != 2) {
    throw ShapeError("matmul expects rank-2/3 by rank-2 operands, got " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  }
  const std::size_t k = a.shape().back();
  if (k != b.dim(0)) {
    throw ShapeError("matmul inner dimensions differ: " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const std::size_t n = b.dim(1);
  const std::size_t m = a.numel() / k;
  Shape shape = a.shape();
  shape.back() = n;
  NodePtr an = a.node();
  NodePtr bn = b.node();
  const auto& A = an->data;
  const auto& B = bn->data;
  std::vector<double> C(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* c = &C[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* brow = &B[p * n];
      for (std::size_t j = 0; j < n; ++j) c[j] += aip * brow[j];
    }
  }
  return make_result(std::move(shape), std::move(C), "matmul", needs_grad({&a, &b}),
                     [an, bn, m, k, n](const detail::Node& o) {
                       const auto& G = o.grad;
                       if (tracks(an)) {
                         // dA = dC * B^T
                         for (std::size_t i = 0; i < m; ++i) {
                           for (std::size_t p = 0; p < k; ++p) {
                             const double* brow = &bn->data[p * n];
                             const double* g = &G[i * n];
                             double acc = 0.0;
                             for (std::size_t j = 0; j < n; ++j) acc += g[j] * brow[j];
                             an->grad[i * k + p] += acc;
                           }
                         }
                       }
                       if (tracks(bn)) {
                         // dB = A^T * dC
                         for (std::size_t i = 0; i < m; ++i) {
                           const double* g = &G[i * n];
                           for (std::size_t p = 0; p < k; ++p) {
                             const double aip = an->data[i * k + p];
                             double* db = &bn->grad[p * n];
                             for (std::size_t j = 0; j < n; ++j) db[j] += aip * g[j];
                           }
                         }
                       }
                     });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("transpose expects rank 2, got " + shape_str(x.shape()));
  const std::size_t r = x.dim(0), c = x.dim(1);
  NodePtr xn = x.node();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = xn->data[i * c + j];
  return make_result({c, r}, std::move(out), "transpose", needs_grad({&x}),
                     [xn, r, c](const detail::Node& o) {
                       for (std::size_t i = 0; i < r; ++i)
                         for (std::size_t j = 0; j < c; ++j) xn->grad[i * c + j] += o.grad[j * r + i];
                     });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  check_axis(x, axis, "softmax");
  const AxisView v = axis_view(x.shape(), axis);
  NodePtr xn = x.node();
  const auto& in = xn->data;
  std::vector<double> out(in.size());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t q = 0; q < v.inner; ++q) {
      const std::size_t base = o * v.length * v.inner + q;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < v.length; ++i) mx = std::max(mx, in[base + i * v.inner]);
      double total = 0.0;
      for (std::size_t i = 0; i < v.length; ++i) {
        double e = std::exp(in[base + i * v.inner] - mx);
        out[base + i * v.inner] = e;
        total += e;
      }
      for (std::size_t i = 0; i < v.length; ++i) out[base + i * v.inner] /= total;
    }
  }
  return make_result(x.shape(), std::move(out), "softmax", needs_grad({&x}),
                     [xn, v](const detail::Node& o) {
                       for (std::size_t a = 0; a < v.outer; ++a) {
                         for (std::size_t q = 0; q < v.inner; ++q) {
                           const std::size_t base = a * v.length * v.inner + q;
                           double dot = 0.0;
                           for (std::size_t i = 0; i < v.length; ++i) {
                             const std::size_t j = base + i * v.inner;
                             dot += o.grad[j] * o.data[j];
                           }
                           for (std::size_t i = 0; i < v.length; ++i) {
                             const std::size_t j = base + i * v.inner;
                             xn->grad[j] += o.data[j] * (o.grad[j] - dot);
                           }
                         }
                       }
                     });
}

Mask Mask::from(std::vector<bool> values) {
  Mask m;
  m.shape = {values.size()};
  m.values = std::move(values);
  return m;
}

Tensor masked_fill(const Tensor& x, const Mask& mask, double fill) {
  if (shape_numel(mask.shape) != mask.values.size()) {
    throw ShapeError("mask shape " + shape_str(mask.shape) + " does not match its " +
                     std::to_string(mask.values.size()) + " values");
  }
  Shape shape = broadcast_shape(x.shape(), mask.shape);
  if (shape != x.shape()) {
    throw ShapeError("mask of shape " + shape_str(mask.shape) + " does not broadcast to " +
                     shape_str(x.shape()));
  }
  auto index = broadcast_index(mask.shape, shape);
  auto keep = std::make_shared<std::vector<bool>>(x.numel());
  NodePtr xn = x.node();
  std::vector<double> out(xn->data);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool masked = mask.values[index[i]];
    (*keep)[i] = !masked;
    if (masked) out[i] = fill;
  }
  return make_result(std::move(shape), std::move(out), "masked_fill", needs_grad({&x}),
                     [xn, keep](const detail::Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i)
                         if ((*keep)[i]) xn->grad[i] += o.grad[i];
                     });
}

Tensor cross_entropy_from_logits(const Tensor& logits, std::span<const std::size_t> targets) {
  if (logits.rank() != 2) {
    throw ShapeError("cross_entropy expects [batch, seq] logits, got " + shape_str(logits.shape()));
  }
  const std::size_t batch = logits.dim(0), seq = logits.dim(1);
  if (targets.size() != batch) {
    throw ShapeError("cross_entropy got " + std::to_string(targets.size()) + " targets for batch " +
                     std::to_string(batch));
  }
  for (std::size_t b = 0; b < batch; ++b) {
    if (targets[b] >= seq) {
      throw ShapeError("cross_entropy target " + std::to_string(targets[b]) +
                       " out of range for sequence length " + std::to_string(seq));
    }
  }
  NodePtr ln = logits.node();
  auto probs = std::make_shared<std::vector<double>>(batch * seq);
  auto tgt = std::make_shared<std::vector<std::size_t>>(targets.begin(), targets.end());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = &ln->data[b * seq];
    double mx = *std::max_element(row, row + seq);
    double total = 0.0;
    for (std::size_t i = 0; i < seq; ++i) total += std::exp(row[i] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t i = 0; i < seq; ++i) (*probs)[b * seq + i] = std::exp(row[i] - lse);
    loss += lse - row[targets[b]];
  }
  loss /= static_cast<double>(batch);
  return make_result({1}, {loss}, "cross_entropy", needs_grad({&logits}),
                     [ln, probs, tgt, batch, seq](const detail::Node& o) {
                       const double g = o.grad[0] / static_cast<double>(batch);
                       for (std::size_t b = 0; b < batch; ++b) {
                         for (std::size_t i = 0; i < seq; ++i) {
                           double d = (*probs)[b * seq + i] - (i == (*tgt)[b] ? 1.0 : 0.0);
                           ln->grad[b * seq + i] += g * d;
                         }
                       }
                     });
}

Tensor sum(const Tensor& x) {
  NodePtr xn = x.node();
  double total = 0.0;
  for (double v : xn->data) total += v;
  return make_result({1}, {total}, "sum", needs_grad({&x}), [xn](const detail::Node& o) {
    for (double& g : xn->grad) g += o.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  if (parts.size() == 1) return parts[0];
  check_axis(parts[0], axis, "concat");
  Shape shape = parts[0].shape();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    Shape s = p.shape();
    if (s.size() != shape.size()) {
      throw ShapeError("concat rank mismatch: " + shape_str(shape) + " vs " + shape_str(s));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != shape[i]) {
        throw ShapeError("concat shape mismatch: " + shape_str(shape) + " vs " + shape_str(s));
      }
    }
    total += s[axis];
  }
  shape[axis] = total;
  const AxisView v = axis_view(shape, axis);
  std::vector<double> out(shape_numel(shape));
  std::vector<NodePtr> nodes;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t len = p.shape()[axis];
    const auto& d = p.node()->data;
    for (std::size_t o = 0; o < v.outer; ++o) {
      std::copy_n(&d[o * len * v.inner], len * v.inner, &out[(o * v.length + offset) * v.inner]);
    }
    nodes.push_back(p.node());
    offsets.push_back(offset);
    offset += len;
  }
  bool track = false;
  for (const Tensor& p : parts) track = track || p.requires_grad();
  track = track && grad_enabled();
  return make_result(std::move(shape), std::move(out), "concat", track,
                     [nodes, offsets, v](const detail::Node& o) {
                       for (std::size_t k = 0; k < nodes.size(); ++k) {
                         const auto& n = nodes[k];
                         if (!tracks(n)) continue;
                         const std::size_t len = n->data.size() / (v.outer * v.inner);
                         for (std::size_t a = 0; a < v.outer; ++a) {
                           const double* src = &o.grad[(a * v.length + offsets[k]) * v.inner];
                           double* dst = &n->grad[a * len * v.inner];
                           for (std::size_t i = 0; i < len * v.inner; ++i) dst[i] += src[i];
                         }
                       }
                     });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  check_axis(x, axis, "slice");
  if (begin >= end || end > x.dim(axis)) {
    throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid on axis " + std::to_string(axis) + " of shape " + shape_str(x.shape()));
  }
  const AxisView v = axis_view(x.shape(), axis);
  Shape shape = x.shape();
  shape[axis] = end - begin;
  const std::size_t len = end - begin;
  NodePtr xn = x.node();
  std::vector<double> out(shape_numel(shape));
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(&xn->data[(o * v.length + begin) * v.inner], len * v.inner, &out[o * len * v.inner]);
  }
  return make_result(std::move(shape), std::move(out), "slice", needs_grad({&x}),
                     [xn, v, begin, len](const detail::Node& o) {
                       for (std::size_t a = 0; a < v.outer; ++a) {
                         const double* src = &o.grad[a * len * v.inner];
                         double* dst = &xn->grad[(a * v.length + begin) * v.inner];
                         for (std::size_t i = 0; i < len * v.inner; ++i) dst[i] += src[i];
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  NodePtr xn = x.node();
  return make_result(std::move(shape), xn->data, "reshape", needs_grad({&x}),
                     [xn](const detail::Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) xn->grad[i] += o.grad[i];
                     });
}

Tensor reverse_rows(const Tensor& x) {
  const std::size_t rows = x.dim(0);
  const std::size_t width = x.numel() / rows;
  NodePtr xn = x.node();
  std::vector<double> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(&xn->data[r * width], width, &out[(rows - 1 - r) * width]);
  }
  return make_result(x.shape(), std::move(out), "reverse_rows", needs_grad({&x}),
                     [xn, rows, width](const detail::Node& o) {
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t j = 0; j < width; ++j)
                           xn->grad[r * width + j] += o.grad[(rows - 1 - r) * width + j];
                     });
}

Tensor segment_max(const Tensor& x, std::span<const std::size_t> offsets) {
  if (x.rank() != 2) throw ShapeError("segment_max expects rank 2, got " + shape_str(x.shape()));
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != x.dim(0)) {
    throw ShapeError("segment_max offsets must run from 0 to " + std::to_string(x.dim(0)));
  }
  const std::size_t segments = offsets.size() - 1;
  const std::size_t width = x.dim(1);
  NodePtr xn = x.node();
  std::vector<double> out(segments * width);
  auto argmax = std::make_shared<std::vector<std::size_t>>(segments * width);
  for (std::size_t s = 0; s < segments; ++s) {
    if (offsets[s + 1] <= offsets[s]) {
      throw ShapeError("segment_max segment " + std::to_string(s) + " is empty");
    }
    for (std::size_t j = 0; j < width; ++j) {
      std::size_t best = offsets[s];
      for (std::size_t r = offsets[s] + 1; r < offsets[s + 1]; ++r) {
        if (xn->data[r * width + j] > xn->data[best * width + j]) best = r;
      }
      out[s * width + j] = xn->data[best * width + j];
      (*argmax)[s * width + j] = best * width + j;
    }
  }
  return make_result({segments, width}, std::move(out), "segment_max", needs_grad({&x}),
                     [xn, argmax](const detail::Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) xn->grad[(*argmax)[i]] += o.grad[i];
                     });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) throw Error("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  auto factors = std::make_shared<std::vector<double>>(x.numel());
  for (double& f : *factors) f = rng.uniform() < rate ? 0.0 : keep_scale;
  NodePtr xn = x.node();
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xn->data[i] * (*factors)[i];
  return make_result(x.shape(), std::move(out), "dropout", needs_grad({&x}),
                     [xn, factors](const detail::Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) xn->grad[i] += o.grad[i] * (*factors)[i];
                     });
}

}  // namespace squadlab
