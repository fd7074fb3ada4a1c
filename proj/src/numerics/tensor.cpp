#include "adhominem/numerics/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "adhominem/errors.hpp"

namespace adhominem::numerics {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
  if (shape_size(shape) != data.size()) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_to_string(shape));
  }
  auto impl = std::make_shared<TensorStorage>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  impl_ = std::move(impl);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  auto n = values.size();
  return Tensor({n}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad) {
  return Tensor({rows, cols}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_to_string(shape()));
  return impl_->shape[axis];
}

std::size_t Tensor::size() const { return impl_->data.size(); }

std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  return impl_->data[0];
}

double Tensor::at(std::size_t i) const { return impl_->data.at(i); }

double Tensor::at(std::size_t i, std::size_t j) const {
  if (rank() != 2) throw DimensionError("at(i, j) on tensor of shape " + shape_to_string(shape()));
  return impl_->data.at(i * impl_->shape[1] + j);
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }
bool Tensor::is_leaf() const { return !impl_->creator; }

bool Tensor::has_grad() const { return !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

const std::shared_ptr<Node>& Tensor::creator() const { return impl_->creator; }
void Tensor::set_creator(std::shared_ptr<Node> node) { impl_->creator = std::move(node); }

Tensor Tensor::clone() const { return Tensor(impl_->shape, impl_->data, impl_->requires_grad && is_leaf()); }

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data, false); }

GradientTape GradientTape::record(const Tensor& root) {
  GradientTape tape;
  tape.root_ = root;
  // Iterative post-order DFS; recurrent unrolls make the graph deep.
  std::unordered_set<const TensorStorage*> visited;
  std::vector<std::pair<Tensor, std::size_t>> stack;
  if (root.creator()) stack.emplace_back(root, 0);
  visited.insert(&root.storage());
  while (!stack.empty()) {
    auto& [t, next] = stack.back();
    const auto& inputs = t.creator()->inputs;
    if (next < inputs.size()) {
      const Tensor child = inputs[next++];
      if (child.creator() && visited.insert(&child.storage()).second) stack.emplace_back(child, 0);
      continue;
    }
    tape.nodes_.push_back(t);
    stack.pop_back();
  }
  return tape;
}

void GradientTape::backward(double seed) const {
  if (root_.size() != 1) {
    throw DimensionError("backward requires a scalar root, got " + shape_to_string(root_.shape()));
  }
  Tensor root = root_;
  root.mutable_grad()[0] += seed;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const auto& storage = it->storage();
    if (storage.grad.empty()) continue;
    storage.creator->backward(storage);
  }
}

void backward(const Tensor& loss, double seed) { GradientTape::record(loss).backward(seed); }

}  // namespace adhominem::numerics
