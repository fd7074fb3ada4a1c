#include "adhominem/evalviz/kendall.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "adhominem/errors.hpp"

namespace adhominem::evalviz {
namespace {

struct TieSums {
  std::int64_t pairs = 0;  // sum t(t-1)/2
  double v = 0.0;          // sum t(t-1)(2t+5)
  double t1 = 0.0;         // sum t(t-1)
  double t2 = 0.0;         // sum t(t-1)(t-2)
};

void add_group(TieSums& s, std::int64_t t) {
  if (t < 2) return;
  const double td = static_cast<double>(t);
  s.pairs += t * (t - 1) / 2;
  s.v += td * (td - 1) * (2 * td + 5);
  s.t1 += td * (td - 1);
  s.t2 += td * (td - 1) * (td - 2);
}

// Sorts `v` in place and returns the number of inversions.
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

KendallResult kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("kendall_tau: inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw DimensionError("kendall_tau: need at least two observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("kendall_tau: non-finite input");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  TieSums tx, ty;
  std::int64_t joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    add_group(tx, static_cast<std::int64_t>(j - i));
    for (std::size_t a = i; a < j;) {
      std::size_t b = a;
      while (b < j && y[order[b]] == y[order[a]]) ++b;
      const auto t = static_cast<std::int64_t>(b - a);
      joint += t * (t - 1) / 2;
      a = b;
    }
    i = j;
  }

  std::vector<double> ys(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = count_inversions(ys, scratch, 0, n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && ys[j] == ys[i]) ++j;
    add_group(ty, static_cast<std::int64_t>(j - i));
    i = j;
  }

  const auto nn = static_cast<std::int64_t>(n);
  const std::int64_t n0 = nn * (nn - 1) / 2;
  if (tx.pairs == n0 || ty.pairs == n0) throw DomainError("kendall_tau: an input is constant");

  KendallResult r;
  r.ties_x = tx.pairs;
  r.ties_y = ty.pairs;
  r.ties_both = joint;
  r.discordant = swaps;
  r.concordant = n0 - tx.pairs - ty.pairs + joint - swaps;
  const std::int64_t s = r.concordant - r.discordant;
  r.tau = static_cast<double>(s) /
          std::sqrt(static_cast<double>(n0 - tx.pairs) * static_cast<double>(n0 - ty.pairs));

  const double nd = static_cast<double>(n);
  double var = (nd * (nd - 1) * (2 * nd + 5) - tx.v - ty.v) / 18.0 + tx.t1 * ty.t1 / (2.0 * nd * (nd - 1));
  if (n > 2) var += tx.t2 * ty.t2 / (9.0 * nd * (nd - 1) * (nd - 2));
  r.p_value = var > 0.0 ? std::erfc(std::abs(static_cast<double>(s)) / std::sqrt(var) / std::sqrt(2.0)) : 1.0;
  r.p_value = std::min(1.0, r.p_value);
  return r;
}

}  // namespace adhominem::evalviz
