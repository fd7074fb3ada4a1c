#include "adhominem/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "adhominem/errors.hpp"

namespace adhominem::numerics {
namespace {

double evaluate(const std::function<Tensor()>& f) {
  const double v = f().item();
  if (!std::isfinite(v)) throw EvaluationError("grad_check: function value is not finite");
  return v;
}

}  // namespace

double grad_check(const std::function<Tensor()>& f, Tensor x, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw DomainError("grad_check: eps must lie in [1e-7, 1e-3]");
  if (!x.requires_grad()) throw DomainError("grad_check: tensor does not require a gradient");

  x.zero_grad();
  Tensor out = f();
  if (!std::isfinite(out.item())) throw EvaluationError("grad_check: function value is not finite");
  backward(out);
  std::vector<double> analytic(x.size(), 0.0);
  if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
  x.zero_grad();

  double worst = 0.0;
  auto values = x.mutable_data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = evaluate(f);
    values[i] = saved - eps;
    const double down = evaluate(f);
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace adhominem::numerics
