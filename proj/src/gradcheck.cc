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

#include "squadlab/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "squadlab/errors.h"

namespace squadlab {
namespace {

// Gradients that vanish analytically (e.g. a shift every softmax input
// shares) leave only rounding noise on both sides.
constexpr double kDenominatorFloor = 1e-4;

}  // namespace

GradCheckResult gradient_check(const std::function<Tensor()>& loss_fn,
                               const std::vector<std::pair<std::string, Tensor>>& inputs, double h) {
  Tape& tape = Tape::current();
  tape.clear();
  for (const auto& [name, t] : inputs) {
    if (!t.requires_grad()) throw Error("gradient check input '" + name + "' does not require grad");
    Tensor handle = t;
    handle.zero_grad();
  }
  backward(loss_fn());
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, t] : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());
  tape.clear();

  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor t = inputs[k].second;
    std::span<double> values = t.mutable_data();
    double diff2 = 0.0;
    double a2 = 0.0;
    double n2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss_fn().item();
      values[i] = saved - h;
      const double down = loss_fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double denom = std::max(std::sqrt(a2) + std::sqrt(n2), kDenominatorFloor);
    const double rel = std::sqrt(diff2) / denom;
    if (rel >= result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_input = inputs[k].first;
    }
  }
  return result;
}

}  // namespace squadlab
