#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mtd/errors.hpp"

namespace mtd::detail {

// Margins rearranged into the canonical order the closed forms are stated in:
// the single violator first, then the satisfying margins ascending (ties kept
// in input order).  `order[i]` is the input index of canonical position i.
struct CanonicalMargins {
  std::vector<double> mu;
  std::vector<int> order;
  int n = 0;
};

inline CanonicalMargins canonical_margins(const std::vector<double>& margins,
                                          const std::string& context) {
  const int n = static_cast<int>(margins.size());
  if (n < 2) {
    throw ValidationError(context + ": need at least 2 configurations (got " +
                          std::to_string(n) + ")");
  }
  int violators = 0;
  for (double m : margins) {
    if (!std::isfinite(m)) {
      throw ValidationError(context + ": margins must be finite");
    }
    if (m <= 0.0) ++violators;
  }
  if (violators == 0) {
    throw ValidationError(context +
                          ": every margin is positive, so each configuration already "
                          "converges on its own; expected exactly one non-positive margin");
  }
  if (violators > 1) {
    throw ValidationError(
        context + ": found " + std::to_string(violators) +
        " non-positive margins but exactly one is supported here; schedules with several "
        "violating configurations are handled by the structure-switching generator "
        "(build_generator with violators > 1)");
  }
  CanonicalMargins c;
  c.n = n;
  c.order.resize(n);
  std::iota(c.order.begin(), c.order.end(), 0);
  std::stable_sort(c.order.begin(), c.order.end(),
                   [&](int a, int b) { return margins[a] < margins[b]; });
  c.mu.resize(n);
  for (int i = 0; i < n; ++i) c.mu[i] = margins[c.order[i]];
  return c;
}

}  // namespace mtd::detail
