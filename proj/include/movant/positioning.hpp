#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "movant/types.hpp"

namespace movant {

// Floor applied to network outputs before they are used as spacing ratios.
inline constexpr double kMinSpacingRatio = 1e-3;

// N-1 relative spacing controls, each within [kMinSpacingRatio, 1].
// Ratio r_n scales the inverse gap between elements n and n+1: smaller
// ratios ask for wider gaps.
template <class Scalar>
struct SpacingRatios {
  VecX<Scalar> values;

  Index size() const { return values.size(); }
};

template <class Scalar>
SpacingRatios<Scalar> clamp_ratios(const VecX<Scalar>& raw) {
  return {raw.cwiseMax(Scalar(kMinSpacingRatio)).cwiseMin(Scalar(1))};
}

enum class LayoutBranch {
  kTentative,  // raw map already fits the region
  kRescaled,   // spacing surplus shrunk so the last element lands on L
};

template <class Scalar>
struct LayoutResult {
  ArrayLayout<Scalar> layout;
  LayoutBranch branch = LayoutBranch::kTentative;
  // Scale of the spacing surplus: d_min on the tentative branch, the
  // computed shrink factor on the rescaled branch.
  Scalar delta = Scalar(0);
};

namespace detail {

template <class Scalar>
void check_ratios(const SpacingRatios<Scalar>& r, const SystemConfig<Scalar>& cfg) {
  if (r.size() != cfg.num_elements - 1)
    throw std::invalid_argument("spacing ratios: expected " +
                                std::to_string(cfg.num_elements - 1) + " values, got " +
                                std::to_string(r.size()));
  for (Index m = 0; m < r.size(); ++m) {
    const Scalar v = r.values[m];
    if (!(v >= Scalar(kMinSpacingRatio) && v <= Scalar(1)))
      throw std::invalid_argument("spacing ratios: value " + std::to_string(m + 1) +
                                  " outside [" + std::to_string(kMinSpacingRatio) + ", 1]");
  }
}

// Raw map: x_1 = 0, gap between n and n+1 is d_min / r_n.
template <class Scalar>
VecX<Scalar> tentative_positions(const SpacingRatios<Scalar>& r,
                                 const SystemConfig<Scalar>& cfg) {
  VecX<Scalar> x(r.size() + 1);
  x[0] = Scalar(0);
  for (Index n = 0; n < r.size(); ++n) x[n + 1] = x[n] + cfg.min_spacing / r.values[n];
  return x;
}

// Rescaled map: every gap keeps d_min and the surplus (1/r_n - 1) is scaled
// by a common delta chosen so the final element lands exactly on L.
template <class Scalar>
VecX<Scalar> rescaled_positions(const SpacingRatios<Scalar>& r,
                                const SystemConfig<Scalar>& cfg, Scalar* delta_out) {
  const Index n = r.size() + 1;
  const Scalar surplus = (r.values.cwiseInverse().array() - Scalar(1)).sum();
  if (!(surplus > Scalar(1e-12)))
    throw std::logic_error("rescaled positions: no spacing surplus to shrink");
  const Scalar delta = (cfg.region_size - Scalar(n - 1) * cfg.min_spacing) / surplus;
  VecX<Scalar> x(n);
  x[0] = Scalar(0);
  for (Index m = 0; m < r.size(); ++m)
    x[m + 1] = x[m] + cfg.min_spacing + delta * (Scalar(1) / r.values[m] - Scalar(1));
  x[n - 1] = cfg.region_size;  // exact by construction, snapped against roundoff
  if (delta_out) *delta_out = delta;
  return x;
}

}  // namespace detail

// Maps spacing ratios to feasible element positions. The raw map is kept
// when it fits the region (the boundary case x_N == L included); otherwise
// the surplus over the minimum spacing is shrunk uniformly.
template <class Scalar>
LayoutResult<Scalar> ratios_to_positions(const SpacingRatios<Scalar>& r,
                                         const SystemConfig<Scalar>& cfg) {
  cfg.validate();
  detail::check_ratios(r, cfg);
  LayoutResult<Scalar> out;
  VecX<Scalar> x = detail::tentative_positions(r, cfg);
  if (x[x.size() - 1] <= cfg.region_size) {
    out.branch = LayoutBranch::kTentative;
    out.delta = cfg.min_spacing;
    out.layout.positions = std::move(x);
  } else {
    out.branch = LayoutBranch::kRescaled;
    out.layout.positions = detail::rescaled_positions(r, cfg, &out.delta);
  }
  return out;
}

// Jacobian of positions with respect to ratios, N x (N-1). Row 1 is zero
// (the first element is pinned at 0); on the rescaled branch row N is zero
// too (the last element is pinned at L).
template <class Scalar>
MatX<Scalar> positions_jacobian(const SpacingRatios<Scalar>& r,
                                const SystemConfig<Scalar>& cfg) {
  cfg.validate();
  detail::check_ratios(r, cfg);
  const Index n = r.size() + 1;
  MatX<Scalar> jac = MatX<Scalar>::Zero(n, n - 1);
  const VecX<Scalar> tentative = detail::tentative_positions(r, cfg);
  if (tentative[n - 1] <= cfg.region_size) {
    // d x_i / d r_m = -d_min / r_m^2 for every element past gap m.
    for (Index m = 0; m < n - 1; ++m) {
      const Scalar coef = -cfg.min_spacing / (r.values[m] * r.values[m]);
      jac.col(m).tail(n - 1 - m).setConstant(coef);
    }
  } else {
    // Partial surplus sums s_i = sum_{m<i} (1/r_m - 1); s_{n-1} is the full
    // surplus that delta divides.
    VecX<Scalar> s(n);
    s[0] = Scalar(0);
    for (Index m = 0; m < n - 1; ++m)
      s[m + 1] = s[m] + Scalar(1) / r.values[m] - Scalar(1);
    const Scalar total = s[n - 1];
    const Scalar delta = (cfg.region_size - Scalar(n - 1) * cfg.min_spacing) / total;
    for (Index m = 0; m < n - 1; ++m) {
      const Scalar inv_r2 = Scalar(1) / (r.values[m] * r.values[m]);
      for (Index i = 1; i < n - 1; ++i)
        jac(i, m) = delta * inv_r2 * (s[i] / total - (m < i ? Scalar(1) : Scalar(0)));
      // row n-1 stays zero: the last element is pinned at L
    }
  }
  return jac;
}

// One geometric constraint violation, reported with the 1-based element
// index and the magnitude of the breach in wavelengths.
template <class Scalar>
struct LayoutViolation {
  enum class Kind { kBelowRange, kAboveRange, kSpacing };
  Kind kind = Kind::kSpacing;
  Index element = 0;
  Scalar magnitude = Scalar(0);
};

// Checks positions against the region bounds and the pairwise minimum
// spacing, with kPositionTolerance slack. Empty result means feasible.
template <class Scalar>
std::vector<LayoutViolation<Scalar>> validate_layout(const ArrayLayout<Scalar>& layout,
                                                     const SystemConfig<Scalar>& cfg) {
  using Violation = LayoutViolation<Scalar>;
  const Scalar tol = Scalar(kPositionTolerance);
  std::vector<Violation> out;
  for (Index i = 0; i < layout.size(); ++i) {
    const Scalar x = layout.positions[i];
    if (x < -tol)
      out.push_back({Violation::Kind::kBelowRange, i + 1, -x});
    else if (x > cfg.region_size + tol)
      out.push_back({Violation::Kind::kAboveRange, i + 1, x - cfg.region_size});
  }
  for (Index i = 1; i < layout.size(); ++i) {
    const Scalar gap = layout.positions[i] - layout.positions[i - 1];
    if (gap < cfg.min_spacing - tol)
      out.push_back({Violation::Kind::kSpacing, i + 1, cfg.min_spacing - gap});
  }
  return out;
}

}  // namespace movant
