#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "movant/array_model.hpp"
#include "movant/positioning.hpp"
#include "movant/rng.hpp"
#include "movant/types.hpp"

namespace movant {

template <class Scalar>
struct BaselineResult {
  ArrayLayout<Scalar> layout;
  Beamformer<Scalar> beamformer;
  Scalar sinr = Scalar(0);  // linear
};

// Fixed-position reference: elements pinned at twice the minimum spacing,
// x_n = (n-1) * 2 d_min, with the optimal beamformer on top.
template <class Scalar>
ArrayLayout<Scalar> fpv_layout(const SystemConfig<Scalar>& cfg) {
  cfg.validate();
  const Scalar span = Scalar(cfg.num_elements - 1) * Scalar(2) * cfg.min_spacing;
  if (span > cfg.region_size)
    throw std::invalid_argument(
        "fixed-position layout: " + std::to_string(cfg.num_elements) +
        " elements at twice the minimum spacing need " +
        std::to_string(static_cast<double>(span)) + " wavelengths, region holds " +
        std::to_string(static_cast<double>(cfg.region_size)));
  ArrayLayout<Scalar> layout;
  layout.positions = VecX<Scalar>::LinSpaced(cfg.num_elements, Scalar(0), span);
  return layout;
}

template <class Scalar>
bool fpv_feasible(const SystemConfig<Scalar>& cfg) {
  return Scalar(cfg.num_elements - 1) * Scalar(2) * cfg.min_spacing <= cfg.region_size;
}

template <class Scalar>
BaselineResult<Scalar> fpv(const Scene<Scalar>& scene, const SystemConfig<Scalar>& cfg) {
  const ArrayLayout<Scalar> layout = fpv_layout(cfg);
  BeamformingSolution<Scalar> sol = optimal_beamformer(layout, scene, cfg);
  return {layout, std::move(sol.beamformer), sol.sinr};
}

// Random reference: spacing ratios drawn uniformly from the valid range and
// a random unit-norm beamformer, i.e. no optimization anywhere.
template <class Scalar>
BaselineResult<Scalar> rpb(const Scene<Scalar>& scene, const SystemConfig<Scalar>& cfg,
                           rng::Engine& engine) {
  cfg.validate();
  SpacingRatios<Scalar> ratios;
  ratios.values.resize(cfg.num_elements - 1);
  for (Index m = 0; m < ratios.size(); ++m)
    ratios.values[m] = Scalar(rng::uniform(engine, kMinSpacingRatio, 1.0));
  BaselineResult<Scalar> out;
  out.layout = ratios_to_positions(ratios, cfg).layout;
  CVecX<Scalar> w(cfg.num_elements);
  for (Index i = 0; i < w.size(); ++i) {
    const std::complex<double> g = rng::complex_gaussian(engine);
    w[i] = std::complex<Scalar>(Scalar(g.real()), Scalar(g.imag()));
  }
  out.beamformer.weights = w / w.norm();
  out.sinr = sinr(out.layout, out.beamformer, scene, cfg);
  return out;
}

template <class Scalar>
struct AoConfig {
  Index grid_points = 200;   // candidate positions per coordinate update
  Index max_sweeps = 50;
  Scalar rel_tolerance = Scalar(1e-6);  // stop when a sweep improves less than this

  void validate() const {
    if (grid_points < 2) throw std::invalid_argument("ao: need at least two grid points");
    if (max_sweeps < 1) throw std::invalid_argument("ao: need at least one sweep");
    if (!(rel_tolerance >= Scalar(0)))
      throw std::invalid_argument("ao: tolerance cannot be negative");
  }
};

template <class Scalar>
struct AoResult {
  ArrayLayout<Scalar> layout;
  Beamformer<Scalar> beamformer;
  Scalar sinr = Scalar(0);
  Index sweeps = 0;  // sweeps actually run
};

// Alternating optimization: coordinate-wise exhaustive search over element
// positions, each coordinate scanned on an inclusive uniform grid within the
// interval its neighbors allow, with the closed-form beamformer folded into
// the objective. The optimal SINR never decreases sweep over sweep.
template <class Scalar>
AoResult<Scalar> ao(const Scene<Scalar>& scene, const SystemConfig<Scalar>& cfg,
                    const AoConfig<Scalar>& ao_cfg = {}) {
  cfg.validate();
  ao_cfg.validate();
  scene.validate();
  const Index n = cfg.num_elements;

  // Start from the fixed-position geometry when it fits, otherwise spread
  // the elements uniformly across the whole region.
  VecX<Scalar> x;
  if (fpv_feasible(cfg))
    x = fpv_layout(cfg).positions;
  else
    x = VecX<Scalar>::LinSpaced(n, Scalar(0), cfg.region_size);

  OptimalSinrEvaluator<Scalar> evaluate(scene, cfg);
  Scalar best = evaluate(x);
  AoResult<Scalar> out;
  for (Index sweep = 0; sweep < ao_cfg.max_sweeps; ++sweep) {
    const Scalar sweep_start = best;
    for (Index i = 0; i < n; ++i) {
      const Scalar lo = i == 0 ? Scalar(0) : x[i - 1] + cfg.min_spacing;
      const Scalar hi = i == n - 1 ? cfg.region_size : x[i + 1] - cfg.min_spacing;
      if (!(lo <= hi)) continue;  // neighbors leave no room at this sweep
      const Scalar saved = x[i];
      Scalar best_pos = saved;
      for (Index g = 0; g < ao_cfg.grid_points; ++g) {
        const Scalar t = Scalar(g) / Scalar(ao_cfg.grid_points - 1);
        x[i] = lo + t * (hi - lo);
        const Scalar eta = evaluate(x);
        if (eta > best) {  // strict improvement only, keeps ascent monotone
          best = eta;
          best_pos = x[i];
        }
      }
      x[i] = best_pos;
    }
    ++out.sweeps;
    if (best - sweep_start <= ao_cfg.rel_tolerance * std::max(std::abs(sweep_start), Scalar(1)))
      break;
  }

  out.layout.positions = std::move(x);
  BeamformingSolution<Scalar> sol = optimal_beamformer(out.layout, scene, cfg);
  out.beamformer = std::move(sol.beamformer);
  out.sinr = sol.sinr;
  return out;
}

}  // namespace movant
