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

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "squadlab/rng.h"
#include "squadlab/tensor.h"

namespace squadlab {

// Named trainable tensors in registration order. Layers hold handles to the
// same storage, so optimizer updates are visible to them.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  // Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  Tensor add(const std::string& name, Shape shape, std::size_t fan_in, Rng& rng);
  Tensor add(const std::string& name, Tensor value);

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;
  const Tensor* find(const std::string& name) const;
  std::size_t parameter_count() const;
  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  double beta1_power = 1.0;
  double beta2_power = 1.0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// One bias-corrected Adam update from the params' grad buffers. Moment
// buffers are allocated on first use.
void adam_step(std::span<Tensor> params, AdamState& state, double learning_rate);

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

}  // namespace squadlab
