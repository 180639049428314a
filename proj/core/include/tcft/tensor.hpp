#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tcft {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

// One entry of the gradient tape. Every node carries a monotonically
// increasing `order`, so replaying reachable nodes by descending order is a
// valid reverse topological sort of the recorded computation.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until populated
  bool requires_grad = false;
  std::uint64_t order = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return inputs.empty(); }
  std::vector<double>& grad_buffer();
};

}  // namespace detail

// Dense row-major float64 array participating in reverse-mode differentiation.
// Copies are shallow: two Tensor handles may refer to the same node.
class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const;
  std::size_t dim() const { return shape().size(); }
  std::size_t size() const;
  // Two-dimensional helpers; both throw DimensionError on other ranks.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  // Writable view for leaves (parameters, inputs). Writing through it does
  // not invalidate any tape, so only mutate leaves between forward passes.
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t i) const { return values()[i]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  // Empty span when no gradient has been populated.
  std::span<const double> grad() const;
  void zero_grad();

  // Replays the tape from this scalar. Leaf gradients accumulate across
  // calls; intermediate gradients are recomputed per call.
  void backward() const;

  // Breaks the link to the producing computation (value copy, no grad).
  Tensor detach() const;

  bool defined() const { return static_cast<bool>(node_); }
  const std::shared_ptr<detail::Node>& node() const { return node_; }

  static Tensor make_result(Shape shape, std::vector<double> value,
                            std::vector<Tensor> inputs, const char* op,
                            std::function<void(detail::Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// Disables tape recording on the current thread for its lifetime, so
// inference does not keep intermediate nodes alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace tcft
