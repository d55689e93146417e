#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "movant/positioning.hpp"
#include "movant/rng.hpp"
#include "movant/types.hpp"

namespace movant {

enum class Activation { kReLU, kSigmoid, kIdentity };

struct LayerSpec {
  Index input_dim = 0;
  Index output_dim = 0;
  Activation activation = Activation::kReLU;
};

inline void check_layer_specs(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("network: need at least one layer");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    if (specs[l].input_dim < 1 || specs[l].output_dim < 1)
      throw std::invalid_argument("network: layer " + std::to_string(l + 1) +
                                  " has a non-positive dimension");
    if (l + 1 < specs.size() && specs[l].output_dim != specs[l + 1].input_dim)
      throw std::invalid_argument("network: layer " + std::to_string(l + 1) +
                                  " output does not feed layer " + std::to_string(l + 2));
  }
}

template <class Scalar>
struct MlpParams {
  std::vector<LayerSpec> specs;
  std::vector<MatX<Scalar>> weights;  // one (output_dim x input_dim) block per layer
  std::vector<VecX<Scalar>> biases;
  std::uint64_t seed = 0;

  std::size_t num_layers() const { return specs.size(); }
  Index input_dim() const { return specs.front().input_dim; }
  Index output_dim() const { return specs.back().output_dim; }
};

template <class Scalar>
struct MlpGrads {
  std::vector<MatX<Scalar>> weights;
  std::vector<VecX<Scalar>> biases;
};

template <class Scalar>
MlpGrads<Scalar> zero_grads_like(const MlpParams<Scalar>& params) {
  MlpGrads<Scalar> g;
  g.weights.reserve(params.num_layers());
  g.biases.reserve(params.num_layers());
  for (const LayerSpec& s : params.specs) {
    g.weights.emplace_back(MatX<Scalar>::Zero(s.output_dim, s.input_dim));
    g.biases.emplace_back(VecX<Scalar>::Zero(s.output_dim));
  }
  return g;
}

// Glorot-uniform weights (half width sqrt(6 / (fan_in + fan_out))), zero
// biases. Weight entries are drawn row by row so the layout of the draw is
// part of the reproducibility contract.
template <class Scalar>
MlpParams<Scalar> init_params(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  check_layer_specs(specs);
  MlpParams<Scalar> params;
  params.specs = specs;
  params.seed = seed;
  rng::Engine engine = rng::make_engine(seed, /*stream=*/2);
  for (const LayerSpec& s : specs) {
    const double half_width =
        std::sqrt(6.0 / static_cast<double>(s.input_dim + s.output_dim));
    MatX<Scalar> w(s.output_dim, s.input_dim);
    for (Index r = 0; r < s.output_dim; ++r)
      for (Index c = 0; c < s.input_dim; ++c)
        w(r, c) = Scalar(rng::uniform(engine, -half_width, half_width));
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(VecX<Scalar>::Zero(s.output_dim));
  }
  return params;
}

// Per-layer values needed to run the backward pass.
template <class Scalar>
struct ForwardCache {
  VecX<Scalar> input;
  std::vector<VecX<Scalar>> pre_activations;
  std::vector<VecX<Scalar>> activations;  // post-activation, before the ratio clamp
};

template <class Scalar>
struct ForwardResult {
  SpacingRatios<Scalar> ratios;
  ForwardCache<Scalar> cache;
};

namespace detail {

template <class Scalar>
VecX<Scalar> activate(const VecX<Scalar>& z, Activation act) {
  switch (act) {
    case Activation::kReLU:
      return z.cwiseMax(Scalar(0));
    case Activation::kSigmoid:
      return (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
    case Activation::kIdentity:
      return z;
  }
  throw std::logic_error("unknown activation");
}

}  // namespace detail

// Runs the network and clamps the final activations into the valid ratio
// range. The cache keeps pre-clamp values for the backward pass.
template <class Scalar>
ForwardResult<Scalar> forward(const MlpParams<Scalar>& params, const VecX<Scalar>& features) {
  if (features.size() != params.input_dim())
    throw std::invalid_argument("forward: expected " + std::to_string(params.input_dim()) +
                                " features, got " + std::to_string(features.size()));
  ForwardResult<Scalar> out;
  out.cache.input = features;
  VecX<Scalar> a = features;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    VecX<Scalar> z = params.weights[l] * a + params.biases[l];
    a = detail::activate(z, params.specs[l].activation);
    out.cache.pre_activations.push_back(std::move(z));
    out.cache.activations.push_back(a);
  }
  out.ratios = clamp_ratios<Scalar>(a);
  return out;
}

// Backpropagates a gradient with respect to the emitted ratios down to every
// weight and bias. Outputs pushed outside [kMinSpacingRatio, 1] sit on the
// flat part of the clamp, so their gradient is cut to zero; ReLU uses the
// zero subgradient at the kink.
template <class Scalar>
MlpGrads<Scalar> backward(const MlpParams<Scalar>& params, const ForwardCache<Scalar>& cache,
                          const VecX<Scalar>& grad_ratios) {
  const std::size_t layers = params.num_layers();
  if (grad_ratios.size() != params.output_dim())
    throw std::invalid_argument("backward: gradient length does not match the output layer");
  MlpGrads<Scalar> grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  const VecX<Scalar>& out = cache.activations.back();
  VecX<Scalar> delta =
      ((out.array() >= Scalar(kMinSpacingRatio)) && (out.array() <= Scalar(1)))
          .select(grad_ratios.array(), Scalar(0))
          .matrix();
  for (std::size_t l = layers; l-- > 0;) {
    switch (params.specs[l].activation) {
      case Activation::kReLU:
        delta = (cache.pre_activations[l].array() > Scalar(0))
                    .select(delta.array(), Scalar(0))
                    .matrix();
        break;
      case Activation::kSigmoid: {
        const auto& a = cache.activations[l].array();
        delta = (delta.array() * a * (Scalar(1) - a)).matrix();
        break;
      }
      case Activation::kIdentity:
        break;
    }
    const VecX<Scalar>& below = l == 0 ? cache.input : cache.activations[l - 1];
    grads.weights[l].noalias() = delta * below.transpose();
    grads.biases[l] = delta;
    if (l > 0) delta = params.weights[l].transpose() * delta;
  }
  return grads;
}

// Scales gradients down to `max_norm` when their global l2 norm exceeds it.
// Returns the norm before clipping.
template <class Scalar>
Scalar clip_gradients(MlpGrads<Scalar>& grads, Scalar max_norm) {
  Scalar sq = Scalar(0);
  for (std::size_t l = 0; l < grads.weights.size(); ++l)
    sq += grads.weights[l].squaredNorm() + grads.biases[l].squaredNorm();
  const Scalar norm = std::sqrt(sq);
  if (norm > max_norm && norm > Scalar(0)) {
    const Scalar scale = max_norm / norm;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
      grads.weights[l] *= scale;
      grads.biases[l] *= scale;
    }
  }
  return norm;
}

// Plain gradient step. Rejects non-finite gradients so a diverged run stops
// at the step that produced it rather than poisoning the parameters.
template <class Scalar>
void sgd_step(MlpParams<Scalar>& params, const MlpGrads<Scalar>& grads, Scalar learning_rate) {
  if (grads.weights.size() != params.num_layers())
    throw std::invalid_argument("sgd_step: gradient layer count mismatch");
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite())
      throw std::runtime_error("sgd_step: non-finite gradient in layer " +
                               std::to_string(l + 1));
    params.weights[l] -= learning_rate * grads.weights[l];
    params.biases[l] -= learning_rate * grads.biases[l];
  }
}

}  // namespace movant
