#pragma once

#include <functional>

#include "adhominem/numerics/tensor.hpp"

namespace adhominem::numerics {

// Compares the reverse-mode gradient of a scalar graph with respect to `x`
// against central differences. `f` must rebuild the graph from the current
// contents of `x` (and any other tensors it closes over) on every call.
//
// Returns max_i |analytic_i - numeric_i| / max(1, |analytic_i|).
// Throws DomainError for eps outside [1e-7, 1e-3] and EvaluationError when
// f is non-finite at any evaluation point.
double grad_check(const std::function<Tensor()>& f, Tensor x, double eps = 1e-6);

}  // namespace adhominem::numerics
