#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace movant {

using Eigen::Index;

template <class Scalar> using VecX  = Eigen::VectorX<Scalar>;
template <class Scalar> using MatX  = Eigen::MatrixX<Scalar>;
template <class Scalar> using CVecX = Eigen::VectorX<std::complex<Scalar>>;
template <class Scalar> using CMatX = Eigen::MatrixX<std::complex<Scalar>>;

// Slack applied to geometric feasibility checks, in wavelengths.
inline constexpr double kPositionTolerance = 1e-9;

// Thrown when the Hermitian solve behind the closed-form beamformer cannot
// be completed, e.g. a covariance corrupted by non-finite positions.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double rcond_estimate)
      : std::runtime_error(what + " (rcond ~ " + std::to_string(rcond_estimate) + ")"),
        rcond_(rcond_estimate) {}
  double rcond_estimate() const { return rcond_; }

 private:
  double rcond_;
};

// Static description of the receive array and its environment. Element
// positions are handled internally in multiples of the carrier wavelength;
// `wavelength` only labels external I/O.
template <class Scalar>
struct SystemConfig {
  Scalar wavelength  = Scalar(1);
  Index num_elements = 8;
  Index num_jammers  = 3;
  Scalar region_size = Scalar(7);    // L, wavelengths
  Scalar min_spacing = Scalar(0.5);  // d_min, wavelengths
  Scalar noise_power = Scalar(0.1);  // sigma_0^2
  // Optional per-transmitter power scale: entry 0 is the source, then one
  // entry per jammer. Empty means every power is 1.
  std::vector<Scalar> tx_power{};

  // Power of transmitter k (0 = source). Entries beyond the list are 1.
  Scalar power(Index k) const {
    return (k >= 0 && static_cast<std::size_t>(k) < tx_power.size())
               ? tx_power[static_cast<std::size_t>(k)]
               : Scalar(1);
  }

  void validate() const {
    if (!(wavelength > Scalar(0)))
      throw std::invalid_argument("system config: wavelength must be positive");
    if (num_elements < 1)
      throw std::invalid_argument("system config: need at least one element");
    if (num_jammers < 0)
      throw std::invalid_argument("system config: jammer count cannot be negative");
    if (!(min_spacing > Scalar(0)))
      throw std::invalid_argument("system config: min spacing must be positive");
    if (!(region_size >= Scalar(num_elements - 1) * min_spacing))
      throw std::invalid_argument(
          "system config: region cannot hold " + std::to_string(num_elements) +
          " elements at min spacing " + std::to_string(static_cast<double>(min_spacing)));
    if (!(noise_power > Scalar(0)))
      throw std::invalid_argument("system config: noise power must be positive");
    if (!tx_power.empty()) {
      if (tx_power.size() != static_cast<std::size_t>(num_jammers) + 1)
        throw std::invalid_argument("system config: tx_power needs one entry per transmitter");
      for (const Scalar p : tx_power)
        if (!(p > Scalar(0)))
          throw std::invalid_argument("system config: tx powers must be positive");
    }
  }
};

// One propagation scene: angles of arrival in radians, each within [0, pi].
template <class Scalar>
struct Scene {
  Scalar source_angle = Scalar(0);
  VecX<Scalar> jammer_angles;

  Index num_jammers() const { return jammer_angles.size(); }

  void validate() const {
    auto in_range = [](Scalar a) {
      return std::isfinite(static_cast<double>(a)) && a >= Scalar(0) &&
             a <= Scalar(3.14159265358979323846L) + Scalar(1e-12);
    };
    if (!in_range(source_angle))
      throw std::invalid_argument("scene: source angle outside [0, pi]");
    for (Index k = 0; k < jammer_angles.size(); ++k)
      if (!in_range(jammer_angles[k]))
        throw std::invalid_argument("scene: jammer angle " + std::to_string(k + 1) +
                                    " outside [0, pi]");
  }
};

// Element positions along the linear region, in wavelengths, ascending.
template <class Scalar>
struct ArrayLayout {
  VecX<Scalar> positions;

  Index size() const { return positions.size(); }
};

// Receive combining weights, unit l2 norm.
template <class Scalar>
struct Beamformer {
  CVecX<Scalar> weights;

  Index size() const { return weights.size(); }
};

}  // namespace movant
