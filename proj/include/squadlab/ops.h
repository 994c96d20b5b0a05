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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "squadlab/tensor.h"

namespace squadlab {

class Rng;

// Fill value for masked logits. Finite so every tensor stays finite.
inline constexpr double kMaskValue = -1e30;

enum class OpKind { kAdd, kSub, kMul, kSigmoid, kTanh, kRelu };

// Binary kinds need `b`; trailing-dimension broadcasting applies.
Tensor elementwise(OpKind kind, const Tensor& a, const Tensor& b = Tensor());

inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(OpKind::kAdd, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(OpKind::kSub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(OpKind::kMul, a, b); }
inline Tensor sigmoid(const Tensor& x) { return elementwise(OpKind::kSigmoid, x); }
inline Tensor tanh(const Tensor& x) { return elementwise(OpKind::kTanh, x); }
inline Tensor relu(const Tensor& x) { return elementwise(OpKind::kRelu, x); }

Tensor scale(const Tensor& x, double factor);

// a: [m,k] or [batch,m,k]; b: [k,n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);

// Boolean mask with its own shape, broadcast against the filled tensor.
struct Mask {
  Shape shape;
  std::vector<bool> values;

  static Mask from(std::vector<bool> values);
};

Tensor masked_fill(const Tensor& x, const Mask& mask, double fill);

// Mean over the batch of -log softmax(logits[b])[targets[b]].
Tensor cross_entropy_from_logits(const Tensor& logits,
                                 std::span<const std::size_t> targets);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end);
Tensor reshape(const Tensor& x, Shape shape);
// Reverses the leading axis.
Tensor reverse_rows(const Tensor& x);

// x: [n,d]. Row-wise max over each segment [offsets[s], offsets[s+1]).
Tensor segment_max(const Tensor& x, std::span<const std::size_t> offsets);

// Inverted dropout; identity when !training or rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training);

}  // namespace squadlab
