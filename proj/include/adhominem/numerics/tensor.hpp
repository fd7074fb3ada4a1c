#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace adhominem::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

class Tensor;
struct TensorStorage;

// One recorded operation. The backward rule reads the gradient of the
// output (passed in) and accumulates into the inputs' gradients.
struct Node {
  std::string op;
  std::vector<Tensor> inputs;
  std::function<void(const TensorStorage& out)> backward;
};

struct TensorStorage {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::shared_ptr<Node> creator;  // null for leaves
};

// Dense row-major array of doubles with an optional link into the reverse-mode
// graph. Copies share storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);

  bool defined() const { return static_cast<bool>(impl_); }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  // Allocates a zero gradient buffer on first use.
  std::span<double> mutable_grad();
  void zero_grad();

  const std::shared_ptr<Node>& creator() const;
  void set_creator(std::shared_ptr<Node> node);

  // Deep copy of data and shape, detached from any graph.
  Tensor clone() const;
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
  const TensorStorage& storage() const { return *impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorStorage> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorStorage> impl_;
};

// Topologically ordered record of every operation reachable from a root.
class GradientTape {
 public:
  static GradientTape record(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Tensor>& outputs() const { return nodes_; }

  // Seeds d(root)/d(root) = seed and replays backward rules in reverse order.
  void backward(double seed = 1.0) const;

 private:
  Tensor root_;
  std::vector<Tensor> nodes_;  // tensors with a creator, inputs before outputs
};

// Convenience: record the tape for a scalar loss and run it.
void backward(const Tensor& loss, double seed = 1.0);

}  // namespace adhominem::numerics
