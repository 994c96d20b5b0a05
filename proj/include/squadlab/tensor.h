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
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "squadlab/errors.h"

namespace squadlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool leaf = true;
  // Position on the recording tape; only meaningful while tape_id matches
  // the id of the tape that recorded it.
  std::uint64_t tape_id = 0;
  std::size_t tape_index = 0;
};

}  // namespace detail

// Dense row-major fp64 array. Copies share storage; values are immutable
// after creation except for leaves (parameters), whose data the optimizer
// updates in place.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Leaves only.
  std::span<double> mutable_data();

  bool requires_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t i, std::size_t j) const;

  // Value copy that carries no gradient and no tape link.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of differentiable operations for the current thread.
// Backward walks the records in reverse, visiting each node once.
class Tape {
 public:
  using BackwardFn = std::function<void(const detail::Node& out)>;

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // The tape of the calling thread.
  static Tape& current();

  void record(const std::shared_ptr<detail::Node>& out, BackwardFn fn);

  // Populates grad of every requires_grad ancestor of `loss`. Leaf grads
  // accumulate across calls; intermediate grads are recomputed.
  void backward(const Tensor& loss);

  void clear();
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::shared_ptr<detail::Node> output;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
  std::uint64_t id_;
};

// Disables recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

inline void backward(const Tensor& loss) { Tape::current().backward(loss); }

}  // namespace squadlab
