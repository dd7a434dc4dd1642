#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sonilab::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Graph record behind a Tensor. `grad` is allocated on first accumulation.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::span<double> grad_buffer();  // allocates zeros if needed
};

/// Handle to a node (const-ness is that of the handle, not the storage).
/// Copies share storage, which is how layers share
/// parameters (e.g. the two towers of a Siamese network).
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> data() const { return node_->value; }
  std::span<double> mutable_data() const { return node_->value; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) const { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() const { return node_->grad_buffer(); }
  void zero_grad() const;

  /// Reverse-mode sweep from this scalar; gradients accumulate into every
  /// reachable node that requires them.
  void backward();

  const std::shared_ptr<Node>& node() const { return node_; }

private:
  std::shared_ptr<Node> node_;
};

/// Builds a result node; graph edges are recorded only when some parent
/// requires a gradient.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward_fn);

}  // namespace sonilab::nn
