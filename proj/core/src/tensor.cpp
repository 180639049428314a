#include "tcft/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <unordered_set>

#include "tcft/errors.hpp"

namespace tcft {

namespace {
std::atomic<std::uint64_t> order_counter{0};
thread_local bool grad_recording = true;

std::uint64_t next_order() { return order_counter.fetch_add(1, std::memory_order_relaxed) + 1; }
}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::vector<double>& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor::Tensor() = default;

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_string(shape) + " holds " +
                         std::to_string(shape_size(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->order = next_order();
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(Shape{1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->value.size(); }

std::size_t Tensor::rows() const {
  if (dim() != 2) throw DimensionError("expected a matrix, got " + shape_string(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (dim() != 2) throw DimensionError("expected a matrix, got " + shape_string(shape()));
  return shape()[1];
}

std::span<const double> Tensor::values() const { return node_->value; }
std::span<double> Tensor::mutable_values() { return node_->value; }

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on non-scalar tensor " + shape_string(shape()));
  }
  return node_->value[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { node_->requires_grad = flag; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  return from(shape(), node_->value, false);
}

Tensor Tensor::make_result(Shape shape, std::vector<double> value,
                           std::vector<Tensor> inputs, const char* op,
                           std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->order = next_order();
  node->op = op;
  const bool tracked = grad_recording && std::any_of(inputs.begin(), inputs.end(),
                                   [](const Tensor& t) { return t.requires_grad(); });
  if (tracked) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(grad_recording) { grad_recording = false; }
NoGradGuard::~NoGradGuard() { grad_recording = previous_; }

void Tensor::backward() const {
  if (!defined()) throw ContractError("backward() on an undefined tensor");
  if (size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_string(shape()));
  }
  if (!node_->requires_grad) return;

  std::vector<detail::Node*> reachable;
  std::unordered_set<detail::Node*> seen;
  std::vector<detail::Node*> stack{node_.get()};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto* n = stack.back();
    stack.pop_back();
    reachable.push_back(n);
    for (auto& in : n->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) stack.push_back(in.get());
    }
  }
  std::sort(reachable.begin(), reachable.end(),
            [](const detail::Node* a, const detail::Node* b) { return a->order > b->order; });

  for (auto* n : reachable) {
    if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto* n : reachable) {
    if (n->backward) n->backward(*n);
  }
}

}  // namespace tcft
