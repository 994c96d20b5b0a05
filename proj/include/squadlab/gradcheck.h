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

#include <functional>
#include <string>
#include <vector>

#include "squadlab/tensor.h"

namespace squadlab {

struct GradCheckResult {
  // Max over inputs of |analytic - numeric|_2 / max(|analytic|_2 + |numeric|_2, 1e-4).
  double max_relative_error = 0.0;
  std::string worst_input;
};

// Compares reverse-mode gradients of a scalar loss against central finite
// differences with step h. loss_fn must rebuild the loss from the current
// values of `inputs`, which are perturbed in place and restored.
GradCheckResult gradient_check(const std::function<Tensor()>& loss_fn,
                               const std::vector<std::pair<std::string, Tensor>>& inputs, double h = 1e-5);

}  // namespace squadlab
