#include "sonilab/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_set>

#include "sonilab/error.hpp"

namespace sonilab::nn {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

std::span<double> Node::grad_buffer() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return from(shape, std::vector<double>(numel(shape), 0.0), requires_grad);
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != numel(shape))
    throw_usage("shape_mismatch", "value count " + std::to_string(values.size()) +
                                      " does not match shape " + shape_string(shape));
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

double Tensor::item() const {
  if (size() != 1) throw_usage("shape_mismatch", "item() needs a single-element tensor, got " + shape_string(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() const { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

void Tensor::backward() {
  if (size() != 1) throw_usage("shape_mismatch", "backward() starts from a scalar");
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn && !(*it)->grad.empty()) (*it)->backward_fn(**it);
}

Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  const bool any = std::any_of(parents.begin(), parents.end(),
                               [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (any) {
    node->requires_grad = true;
    for (auto& p : parents)
      if (p.defined()) node->parents.push_back(p.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

}  // namespace sonilab::nn
