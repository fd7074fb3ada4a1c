#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adhominem/numerics/tensor.hpp"

// Differentiable operations. Each op records a backward rule whenever at
// least one input requires a gradient. Shape errors throw DimensionError and
// empty/invalid domains throw DomainError.
namespace adhominem::numerics {

// A[m x k] * B[k x n] -> [m x n]; B may also be a vector [k], giving [m].
Tensor matmul(const Tensor& a, const Tensor& b);

// x W^T + b. x is [in] -> [out], or [P x in] -> [P x out] (row-wise).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

Tensor tanh_map(const Tensor& x);
Tensor sigmoid_map(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor square(const Tensor& x);

// Sum of all entries, shape [1].
Tensor sum(const Tensor& x);

// Numerically stable softmax of a vector (max subtraction).
Tensor softmax(const Tensor& v);

// Concatenation along the leading axis. Vectors join end to end; matrices
// stack their rows. All parts must share trailing dimensions.
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);

// Stacks equal-length vectors as the rows of a matrix.
Tensor stack_rows(std::span<const Tensor> rows);

Tensor slice(const Tensor& v, std::size_t start, std::size_t length);
Tensor row(const Tensor& m, std::size_t index);
Tensor reshape(const Tensor& x, Shape shape);

// Gathers rows of an embedding table [V x D]; gradient scatters back.
Tensor embedding_rows(const Tensor& table, std::span<const int> ids);

// Sliding windows of width h over the rows of X [L x D]: output row i is
// X[i] (+) X[i+1] (+) ... (+) X[i+h-1], shape [(L-h+1) x hD].
Tensor unfold_windows(const Tensor& x, std::size_t width);

struct MaxPoolResult {
  Tensor values;                    // [D]
  std::vector<std::size_t> argmax;  // winning row per column, ties -> lowest
};

// Column-wise maximum over the rows of M [T x D].
MaxPoolResult max_over_time(const Tensor& m);

// alpha[T] weighted sum of the rows of H [T x D] -> [D].
Tensor weighted_sum(const Tensor& alpha, const Tensor& rows);

// ||a - b||_2 as shape [1]. The gradient at a == b is taken as zero.
Tensor euclidean_distance(const Tensor& a, const Tensor& b);

}  // namespace adhominem::numerics
