#pragma once

#include <algorithm>
#include <cmath>

#include "movant/types.hpp"

namespace testutil {

// Relative error with an absolute floor: values below 1 are compared
// absolutely, everything else relatively.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_rel_err(const movant::VecX<double>& a, const movant::VecX<double>& b) {
  double worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, rel_err(a[i], b[i]));
  return worst;
}

inline double max_rel_err(const movant::MatX<double>& a, const movant::MatX<double>& b) {
  double worst = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      worst = std::max(worst, rel_err(a(i, j), b(i, j)));
  return worst;
}

}  // namespace testutil
