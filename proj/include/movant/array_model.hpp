#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "movant/types.hpp"

namespace movant {

namespace detail {

// Writes exp(j 2*pi * x_n * cos_angle) into `out`, positions in wavelengths.
template <class Scalar>
void fill_steering(const VecX<Scalar>& positions, Scalar cos_angle, CVecX<Scalar>& out) {
  const Scalar freq = Scalar(2) * std::numbers::pi_v<Scalar> * cos_angle;
  out = (freq * positions.array())
            .unaryExpr([](Scalar phase) { return std::polar(Scalar(1), phase); })
            .matrix();
}

}  // namespace detail

// Phase response of the array towards a plane wave arriving from `angle`.
template <class Scalar>
CVecX<Scalar> steering_vector(const ArrayLayout<Scalar>& layout, Scalar angle,
                              const SystemConfig<Scalar>&) {
  CVecX<Scalar> a(layout.size());
  detail::fill_steering(layout.positions, std::cos(angle), a);
  return a;
}

// Output signal-to-interference-plus-noise ratio of beamformer `w`, linear.
template <class Scalar>
Scalar sinr(const ArrayLayout<Scalar>& layout, const Beamformer<Scalar>& w,
            const Scene<Scalar>& scene, const SystemConfig<Scalar>& cfg) {
  if (w.size() != layout.size())
    throw std::invalid_argument("sinr: beamformer length does not match the array");
  const Scalar norm_dev = std::abs(w.weights.norm() - Scalar(1));
  if (!(norm_dev <= Scalar(1e-6)))
    throw std::invalid_argument("sinr: beamformer norm deviates from 1 by " +
                                std::to_string(static_cast<double>(norm_dev)));
  const CVecX<Scalar> a0 = steering_vector(layout, scene.source_angle, cfg);
  const Scalar signal = cfg.power(0) * std::norm(w.weights.dot(a0));
  Scalar denom = cfg.noise_power;
  for (Index k = 0; k < scene.num_jammers(); ++k) {
    const CVecX<Scalar> ak = steering_vector(layout, scene.jammer_angles[k], cfg);
    denom += cfg.power(k + 1) * std::norm(w.weights.dot(ak));
  }
  return signal / denom;
}

// Signal covariance (rank one) and jamming-plus-noise covariance (Hermitian
// positive definite; its eigenvalues are bounded below by the noise power).
template <class Scalar>
struct Covariances {
  CMatX<Scalar> signal;
  CMatX<Scalar> jamming_noise;
};

template <class Scalar>
Covariances<Scalar> build_covariances(const ArrayLayout<Scalar>& layout,
                                      const Scene<Scalar>& scene,
                                      const SystemConfig<Scalar>& cfg) {
  const Index n = layout.size();
  const CVecX<Scalar> a0 = steering_vector(layout, scene.source_angle, cfg);
  Covariances<Scalar> cov;
  cov.signal.noalias() = cfg.power(0) * (a0 * a0.adjoint());
  cov.jamming_noise = CMatX<Scalar>::Zero(n, n);
  CVecX<Scalar> ak(n);
  for (Index k = 0; k < scene.num_jammers(); ++k) {
    detail::fill_steering(layout.positions, std::cos(scene.jammer_angles[k]), ak);
    cov.jamming_noise.template selfadjointView<Eigen::Lower>().rankUpdate(ak, cfg.power(k + 1));
  }
  cov.jamming_noise = cov.jamming_noise.template selfadjointView<Eigen::Lower>();
  cov.jamming_noise.diagonal().array() += cfg.noise_power;
  return cov;
}

template <class Scalar>
struct BeamformingSolution {
  Beamformer<Scalar> beamformer;
  Scalar sinr = Scalar(0);
};

// Closed-form optimal receive beamformer: the jamming-plus-noise whitened
// match to the source steering vector, computed with a Hermitian LLT solve
// rather than an explicit inverse. The attained SINR equals the Rayleigh
// quotient maximum a0^H B^{-1} a0 (times the source power).
template <class Scalar>
BeamformingSolution<Scalar> optimal_beamformer(const ArrayLayout<Scalar>& layout,
                                               const Scene<Scalar>& scene,
                                               const SystemConfig<Scalar>& cfg) {
  const Covariances<Scalar> cov = build_covariances(layout, scene, cfg);
  const CVecX<Scalar> a0 = steering_vector(layout, scene.source_angle, cfg);
  Eigen::LLT<CMatX<Scalar>> llt(cov.jamming_noise);
  if (llt.info() != Eigen::Success)
    throw SolverError("optimal_beamformer: covariance factorization failed",
                      static_cast<double>(llt.rcond()));
  const CVecX<Scalar> z = llt.solve(a0);
  if (!z.allFinite())
    throw SolverError("optimal_beamformer: solve produced non-finite weights",
                      static_cast<double>(llt.rcond()));
  const Scalar eta = cfg.power(0) * std::real(a0.dot(z));
  BeamformingSolution<Scalar> out;
  out.beamformer.weights = z / z.norm();
  out.sinr = eta;
  return out;
}

// SINR attained by the optimal beamformer, without forming the weights.
template <class Scalar>
Scalar optimal_sinr(const ArrayLayout<Scalar>& layout, const Scene<Scalar>& scene,
                    const SystemConfig<Scalar>& cfg) {
  return optimal_beamformer(layout, scene, cfg).sinr;
}

// Gradient of the optimal SINR with respect to each element position, in
// inverse wavelengths. Uses the envelope form: the beamformer is held at its
// optimum while positions move, so only the steering vectors differentiate.
// With z = B^{-1} a0 and c_k = a_k^H z,
//   d eta / d x_n = 4*pi * [ p0 cos(t0) Im(conj(a0_n) z_n)
//                          + sum_k p_k cos(t_k) Im(conj(z_n) a_k_n c_k) ].
template <class Scalar>
VecX<Scalar> sinr_position_gradient(const ArrayLayout<Scalar>& layout,
                                    const Scene<Scalar>& scene,
                                    const SystemConfig<Scalar>& cfg) {
  const Index n = layout.size();
  const Covariances<Scalar> cov = build_covariances(layout, scene, cfg);
  const CVecX<Scalar> a0 = steering_vector(layout, scene.source_angle, cfg);
  Eigen::LLT<CMatX<Scalar>> llt(cov.jamming_noise);
  if (llt.info() != Eigen::Success)
    throw SolverError("sinr_position_gradient: covariance factorization failed",
                      static_cast<double>(llt.rcond()));
  const CVecX<Scalar> z = llt.solve(a0);
  if (!z.allFinite())
    throw SolverError("sinr_position_gradient: solve produced non-finite values",
                      static_cast<double>(llt.rcond()));

  const Scalar four_pi = Scalar(4) * std::numbers::pi_v<Scalar>;
  VecX<Scalar> grad =
      (four_pi * cfg.power(0) * std::cos(scene.source_angle)) *
      a0.conjugate().cwiseProduct(z).imag();
  CVecX<Scalar> ak(n);
  for (Index k = 0; k < scene.num_jammers(); ++k) {
    detail::fill_steering(layout.positions, std::cos(scene.jammer_angles[k]), ak);
    const std::complex<Scalar> ck = ak.dot(z);
    grad += (four_pi * cfg.power(k + 1) * std::cos(scene.jammer_angles[k])) *
            (z.conjugate().cwiseProduct(ak) * ck).imag();
  }
  return grad;
}

// Repeated optimal-SINR evaluation against one fixed scene with varying
// positions, allocation-free after construction. This is the inner loop of
// the coordinate-search baseline, where the same scene is probed thousands
// of times.
template <class Scalar>
class OptimalSinrEvaluator {
 public:
  OptimalSinrEvaluator(const Scene<Scalar>& scene, const SystemConfig<Scalar>& cfg)
      : cfg_(cfg),
        cos_source_(std::cos(scene.source_angle)),
        cos_jam_(scene.jammer_angles.array().cos()),
        a0_(cfg.num_elements),
        ak_(cfg.num_elements),
        b_(cfg.num_elements, cfg.num_elements),
        z_(cfg.num_elements),
        llt_(cfg.num_elements) {}

  // Optimal SINR for the given element positions (wavelengths).
  Scalar operator()(const VecX<Scalar>& positions) {
    detail::fill_steering(positions, cos_source_, a0_);
    b_.setZero();
    for (Index k = 0; k < cos_jam_.size(); ++k) {
      detail::fill_steering(positions, cos_jam_[k], ak_);
      b_.template selfadjointView<Eigen::Lower>().rankUpdate(ak_, cfg_.power(k + 1));
    }
    b_.diagonal().array() += cfg_.noise_power;
    llt_.compute(b_);  // reads the lower triangle only
    if (llt_.info() != Eigen::Success)
      throw SolverError("optimal sinr evaluation: covariance factorization failed",
                        static_cast<double>(llt_.rcond()));
    z_ = llt_.solve(a0_);
    return cfg_.power(0) * std::real(a0_.dot(z_));
  }

 private:
  SystemConfig<Scalar> cfg_;
  Scalar cos_source_;
  VecX<Scalar> cos_jam_;
  CVecX<Scalar> a0_, ak_;
  CMatX<Scalar> b_;
  CVecX<Scalar> z_;
  Eigen::LLT<CMatX<Scalar>> llt_;
};

}  // namespace movant
