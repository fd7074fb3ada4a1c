#pragma once

#include <cstdint>
#include <span>

namespace adhominem::evalviz {

struct KendallResult {
  double tau = 0.0;      // tau-b
  double p_value = 1.0;  // two-sided, normal approximation with tie-corrected variance
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t ties_x = 0;     // pairs tied in x (including joint ties)
  std::int64_t ties_y = 0;     // pairs tied in y (including joint ties)
  std::int64_t ties_both = 0;  // pairs tied in both
};

// Kendall tau-b in O(n log n) (merge-sort inversion counting). Throws
// DimensionError on length mismatch or n < 2, and DomainError when an input
// is constant or contains non-finite values.
KendallResult kendall_tau(std::span<const double> x, std::span<const double> y);

}  // namespace adhominem::evalviz
