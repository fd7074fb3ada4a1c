#include "adhominem/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adhominem/errors.hpp"

namespace adhominem::numerics {
namespace {

using Backward = std::function<void(const TensorStorage&)>;

Tensor finish(Shape shape, std::vector<double> data, std::vector<Tensor> inputs, const char* op, Backward rule) {
  Tensor out(std::move(shape), std::move(data), false);
  bool tracked = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (tracked) {
    out.set_requires_grad(true);
    auto node = std::make_shared<Node>();
    node->op = op;
    node->inputs = std::move(inputs);
    node->backward = std::move(rule);
    out.set_creator(std::move(node));
  }
  return out;
}

std::span<double> grad_buffer(Tensor t) { return t.mutable_grad(); }

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw DomainError(std::string(op) + ": undefined tensor operand");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

void require_vector(const Tensor& t, const char* op) {
  require_defined(t, op);
  if (t.rank() != 1) throw DimensionError(std::string(op) + ": expected a vector, got " + shape_to_string(t.shape()));
}

void require_matrix(const Tensor& t, const char* op) {
  require_defined(t, op);
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_to_string(t.shape()));
}

template <typename Forward, typename Derivative>
Tensor elementwise(const Tensor& x, const char* op, Forward f, Derivative df_from_output) {
  require_defined(x, op);
  std::vector<double> out(x.size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return finish(x.shape(), std::move(out), {x}, op, [x, df_from_output](const TensorStorage& o) {
    auto gx = grad_buffer(x);
    auto in = x.data();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += o.grad[i] * df_from_output(in[i], o.data[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_defined(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1);
  if (b.rank() > 2 || b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  const std::size_t n = b.rank() == 2 ? b.dim(1) : 1;
  std::vector<double> out(m * n, 0.0);
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* brow = &B[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  Shape shape = b.rank() == 2 ? Shape{m, n} : Shape{m};
  return finish(std::move(shape), std::move(out), {a, b}, "matmul", [a, b, m, k, n](const TensorStorage& o) {
    const auto& G = o.grad;
    auto A = a.data();
    auto B = b.data();
    if (a.requires_grad()) {
      auto gA = grad_buffer(a);  // dA = dC B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
          gA[i * k + p] += s;
        }
    }
    if (b.requires_grad()) {
      auto gB = grad_buffer(b);  // dB = A^T dC
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gB[p * n + j] += aip * G[i * n + j];
        }
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_matrix(weight, "linear");
  require_vector(bias, "linear");
  require_defined(x, "linear");
  const std::size_t out_dim = weight.dim(0), in_dim = weight.dim(1);
  if (bias.dim(0) != out_dim) {
    throw DimensionError("linear: bias " + shape_to_string(bias.shape()) + " does not match weight " +
                         shape_to_string(weight.shape()));
  }
  const bool batched = x.rank() == 2;
  if (x.rank() > 2 || x.shape().back() != in_dim) {
    throw DimensionError("linear: input " + shape_to_string(x.shape()) + " does not match weight " +
                         shape_to_string(weight.shape()));
  }
  const std::size_t rows = batched ? x.dim(0) : 1;
  std::vector<double> out(rows * out_dim);
  auto X = x.data();
  auto W = weight.data();
  auto b = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = &X[r * in_dim];
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wr = &W[o * in_dim];
      double s = b[o];
      for (std::size_t i = 0; i < in_dim; ++i) s += wr[i] * xr[i];
      out[r * out_dim + o] = s;
    }
  }
  Shape shape = batched ? Shape{rows, out_dim} : Shape{out_dim};
  return finish(std::move(shape), std::move(out), {x, weight, bias}, "linear",
                [x, weight, bias, rows, in_dim, out_dim](const TensorStorage& o) {
                  const auto& G = o.grad;
                  auto X = x.data();
                  auto W = weight.data();
                  if (x.requires_grad()) {
                    auto gx = grad_buffer(x);
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t q = 0; q < out_dim; ++q) {
                        const double g = G[r * out_dim + q];
                        if (g == 0.0) continue;
                        const double* wr = &W[q * in_dim];
                        double* gxr = &gx[r * in_dim];
                        for (std::size_t i = 0; i < in_dim; ++i) gxr[i] += g * wr[i];
                      }
                  }
                  if (weight.requires_grad()) {
                    auto gw = grad_buffer(weight);
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t q = 0; q < out_dim; ++q) {
                        const double g = G[r * out_dim + q];
                        if (g == 0.0) continue;
                        const double* xr = &X[r * in_dim];
                        double* gwr = &gw[q * in_dim];
                        for (std::size_t i = 0; i < in_dim; ++i) gwr[i] += g * xr[i];
                      }
                  }
                  if (bias.requires_grad()) {
                    auto gb = grad_buffer(bias);
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t q = 0; q < out_dim; ++q) gb[q] += G[r * out_dim + q];
                  }
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] + B[i];
  return finish(a.shape(), std::move(out), {a, b}, "add", [a, b](const TensorStorage& o) {
    for (const Tensor& t : {a, b}) {
      if (!t.requires_grad()) continue;
      auto g = grad_buffer(t);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] - B[i];
  return finish(a.shape(), std::move(out), {a, b}, "sub", [a, b](const TensorStorage& o) {
    if (a.requires_grad()) {
      auto g = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (b.requires_grad()) {
      auto g = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
    }
  });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  std::vector<double> out(a.size());
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * B[i];
  return finish(a.shape(), std::move(out), {a, b}, "hadamard", [a, b](const TensorStorage& o) {
    auto A = a.data();
    auto B = b.data();
    if (a.requires_grad()) {
      auto g = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * B[i];
    }
    if (b.requires_grad()) {
      auto g = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * A[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  return elementwise(
      a, "scale", [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return elementwise(
      a, "add_scalar", [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Tensor tanh_map(const Tensor& x) {
  return elementwise(
      x, "tanh", [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid_map(const Tensor& x) {
  return elementwise(
      x, "sigmoid",
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return elementwise(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor square(const Tensor& x) {
  return elementwise(
      x, "square", [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double s = 0.0;
  for (double v : x.data()) s += v;
  return finish({1}, {s}, {x}, "sum", [x](const TensorStorage& o) {
    auto g = grad_buffer(x);
    for (auto& v : g) v += o.grad[0];
  });
}

Tensor softmax(const Tensor& v) {
  require_vector(v, "softmax");
  auto in = v.data();
  for (double e : in) {
    if (!std::isfinite(e)) throw DomainError("softmax: non-finite entry");
  }
  const double peak = *std::max_element(in.begin(), in.end());
  std::vector<double> out(in.size());
  double total = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - peak);
    total += out[i];
  }
  for (auto& e : out) e /= total;
  return finish(v.shape(), std::move(out), {v}, "softmax", [v](const TensorStorage& o) {
    const auto& y = o.data;
    const auto& G = o.grad;
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * G[i];
    auto g = grad_buffer(v);
    for (std::size_t i = 0; i < y.size(); ++i) g[i] += y[i] * (G[i] - dot);
  });
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw DomainError("concat: no operands");
  for (const auto& p : parts) require_defined(p, "concat");
  const Shape& first = parts.front().shape();
  std::size_t lead = 0;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != first.size() || !std::equal(first.begin() + 1, first.end(), p.shape().begin() + 1)) {
      throw DimensionError("concat: trailing dimensions differ, " + shape_to_string(first) + " vs " +
                           shape_to_string(p.shape()));
    }
    lead += p.dim(0);
    total += p.size();
  }
  std::vector<double> out;
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  Shape shape = first;
  shape[0] = lead;
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return finish(std::move(shape), std::move(out), inputs, "concat", [inputs](const TensorStorage& o) {
    std::size_t offset = 0;
    for (const auto& p : inputs) {
      if (p.requires_grad()) {
        auto g = grad_buffer(p);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[offset + i];
      }
      offset += p.size();
    }
  });
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw DomainError("stack_rows: no rows");
  for (const auto& r : rows) require_vector(r, "stack_rows");
  const std::size_t width = rows.front().dim(0);
  for (const auto& r : rows) {
    if (r.dim(0) != width) {
      throw DimensionError("stack_rows: row lengths differ, " + shape_to_string(rows.front().shape()) + " vs " +
                           shape_to_string(r.shape()));
    }
  }
  return reshape(concat(rows), {rows.size(), width});
}

Tensor slice(const Tensor& v, std::size_t start, std::size_t length) {
  require_vector(v, "slice");
  if (length == 0 || start + length > v.size()) {
    throw DimensionError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") outside " + shape_to_string(v.shape()));
  }
  std::vector<double> out(v.data().begin() + start, v.data().begin() + start + length);
  return finish({length}, std::move(out), {v}, "slice", [v, start](const TensorStorage& o) {
    auto g = grad_buffer(v);
    for (std::size_t i = 0; i < o.grad.size(); ++i) g[start + i] += o.grad[i];
  });
}

Tensor row(const Tensor& m, std::size_t index) {
  require_matrix(m, "row");
  if (index >= m.dim(0)) {
    throw DimensionError("row: index " + std::to_string(index) + " outside " + shape_to_string(m.shape()));
  }
  const std::size_t width = m.dim(1);
  std::vector<double> out(m.data().begin() + index * width, m.data().begin() + (index + 1) * width);
  return finish({width}, std::move(out), {m}, "row", [m, index, width](const TensorStorage& o) {
    auto g = grad_buffer(m);
    for (std::size_t i = 0; i < width; ++i) g[index * width + i] += o.grad[i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require_defined(x, "reshape");
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " + shape_to_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return finish(std::move(shape), std::move(out), {x}, "reshape", [x](const TensorStorage& o) {
    auto g = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
}

Tensor embedding_rows(const Tensor& table, std::span<const int> ids) {
  require_matrix(table, "embedding_rows");
  if (ids.empty()) throw DomainError("embedding_rows: no ids");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<double> out;
  out.reserve(ids.size() * width);
  auto T = table.data();
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw DimensionError("embedding_rows: id " + std::to_string(id) + " outside table " +
                           shape_to_string(table.shape()));
    }
    out.insert(out.end(), T.begin() + id * width, T.begin() + (id + 1) * width);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return finish({ids.size(), width}, std::move(out), {table}, "embedding_rows",
                [table, saved = std::move(saved), width](const TensorStorage& o) {
                  auto g = grad_buffer(table);
                  for (std::size_t r = 0; r < saved.size(); ++r) {
                    double* dst = &g[static_cast<std::size_t>(saved[r]) * width];
                    for (std::size_t i = 0; i < width; ++i) dst[i] += o.grad[r * width + i];
                  }
                });
}

Tensor unfold_windows(const Tensor& x, std::size_t width) {
  require_matrix(x, "unfold_windows");
  const std::size_t length = x.dim(0), d = x.dim(1);
  if (width == 0 || width > length) {
    throw DomainError("unfold_windows: window width " + std::to_string(width) + " does not fit " +
                      std::to_string(length) + " rows");
  }
  const std::size_t positions = length - width + 1;
  const std::size_t span = width * d;
  std::vector<double> out(positions * span);
  auto X = x.data();
  for (std::size_t p = 0; p < positions; ++p) std::copy_n(&X[p * d], span, &out[p * span]);
  return finish({positions, span}, std::move(out), {x}, "unfold_windows",
                [x, positions, span, d](const TensorStorage& o) {
                  auto g = grad_buffer(x);
                  for (std::size_t p = 0; p < positions; ++p)
                    for (std::size_t i = 0; i < span; ++i) g[p * d + i] += o.grad[p * span + i];
                });
}

MaxPoolResult max_over_time(const Tensor& m) {
  require_defined(m, "max_over_time");
  if (m.rank() != 2) throw DimensionError("max_over_time: expected [T x D], got " + shape_to_string(m.shape()));
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  auto M = m.data();
  std::vector<double> values(M.begin(), M.begin() + cols);
  std::vector<std::size_t> argmax(cols, 0);
  for (std::size_t t = 1; t < rows; ++t)
    for (std::size_t d = 0; d < cols; ++d) {
      if (M[t * cols + d] > values[d]) {
        values[d] = M[t * cols + d];
        argmax[d] = t;
      }
    }
  Tensor out = finish({cols}, std::move(values), {m}, "max_over_time", [m, argmax, cols](const TensorStorage& o) {
    auto g = grad_buffer(m);
    for (std::size_t d = 0; d < cols; ++d) g[argmax[d] * cols + d] += o.grad[d];
  });
  return {std::move(out), std::move(argmax)};
}

Tensor weighted_sum(const Tensor& alpha, const Tensor& rows) {
  require_vector(alpha, "weighted_sum");
  require_matrix(rows, "weighted_sum");
  if (alpha.dim(0) != rows.dim(0)) {
    throw DimensionError("weighted_sum: weights " + shape_to_string(alpha.shape()) + " vs rows " +
                         shape_to_string(rows.shape()));
  }
  return reshape(matmul(reshape(alpha, {1, alpha.dim(0)}), rows), {rows.dim(1)});
}

Tensor euclidean_distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "euclidean_distance");
  auto A = a.data();
  auto B = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += (A[i] - B[i]) * (A[i] - B[i]);
  const double dist = std::sqrt(s);
  return finish({1}, {dist}, {a, b}, "euclidean_distance", [a, b, dist](const TensorStorage& o) {
    if (dist == 0.0) return;
    auto A = a.data();
    auto B = b.data();
    const double g = o.grad[0] / dist;
    if (a.requires_grad()) {
      auto ga = grad_buffer(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * (A[i] - B[i]);
    }
    if (b.requires_grad()) {
      auto gb = grad_buffer(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g * (A[i] - B[i]);
    }
  });
}

}  // namespace adhominem::numerics
