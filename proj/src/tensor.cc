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

#include "squadlab/tensor.h"

#include <atomic>
#include <cmath>
#include <sstream>

namespace squadlab {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("shape " + shape_str(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in tensor of shape " + shape_str(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->data.size(), 0.0);
  node_ = std::move(node);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::filled(Shape shape, double value) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape()));
  }
  return shape()[axis];
}

std::size_t Tensor::numel() const { return node_->data.size(); }

std::span<const double> Tensor::data() const { return node_->data; }

std::span<double> Tensor::mutable_data() {
  if (!node_->leaf) throw Error("mutable_data() is only available on leaf tensors");
  return node_->data;
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() { return node_->grad; }

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  return node_->data[i * shape().back() + j];
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->data); }

namespace {

std::atomic<std::uint64_t> next_tape_id{1};
thread_local bool grad_mode = true;

}  // namespace

Tape::Tape() : id_(next_tape_id.fetch_add(1)) {}

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::record(const std::shared_ptr<detail::Node>& out, BackwardFn fn) {
  out->leaf = false;
  out->tape_id = id_;
  out->tape_index = entries_.size();
  entries_.push_back(Entry{out, std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined()) throw Error("backward() on an undefined tensor");
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  const auto& root = loss.node();
  if (!root->requires_grad) throw Error("backward() on a tensor that does not require grad");
  if (root->leaf) {
    root->grad[0] += 1.0;
    return;
  }
  if (root->tape_id != id_ || root->tape_index >= entries_.size() ||
      entries_[root->tape_index].output != root) {
    throw Error("backward() on a tensor that is not on the active tape");
  }
  const std::size_t last = root->tape_index;
  for (std::size_t i = 0; i <= last; ++i) {
    auto& g = entries_[i].output->grad;
    std::fill(g.begin(), g.end(), 0.0);
  }
  root->grad[0] = 1.0;
  for (std::size_t i = last + 1; i-- > 0;) {
    const Entry& e = entries_[i];
    e.backward(*e.output);
  }
}

void Tape::clear() {
  entries_.clear();
  id_ = next_tape_id.fetch_add(1);
}

NoGradGuard::NoGradGuard() : previous_(grad_mode) { grad_mode = false; }
NoGradGuard::~NoGradGuard() { grad_mode = previous_; }

bool grad_enabled() { return grad_mode; }

}  // namespace squadlab
