#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "movant/array_model.hpp"
#include "movant/io.hpp"
#include "movant/neural.hpp"
#include "movant/positioning.hpp"
#include "movant/rng.hpp"
#include "movant/types.hpp"

namespace movant {

// Sub-stream tags hung off the master seed. Keeping them in one place makes
// the derived streams non-overlapping by construction.
inline constexpr std::uint64_t kDatasetStream = 1;
// stream 2 is taken by parameter initialization (see neural.hpp)
inline constexpr std::uint64_t kHoldoutStream = 3;
inline constexpr std::uint64_t kShuffleStreamBase = 1u << 16;

enum class Featurization {
  kNormalizedAngle,  // theta / pi, in [0, 1]
  kCosine,           // cos(theta), in [-1, 1]
};

template <class Scalar>
struct TrainConfig {
  SystemConfig<Scalar> system{};
  std::size_t dataset_size = 100000;
  std::size_t batch_size = 100;
  Scalar learning_rate = Scalar(1e-3);
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  Featurization features = Featurization::kNormalizedAngle;
  std::vector<Index> hidden_dims{128, 128};
  Scalar momentum = Scalar(0);       // 0 disables the velocity buffer
  Scalar grad_clip_norm = Scalar(10);
  // When set, every sampled scene uses this source angle; jammers stay random.
  std::optional<Scalar> fixed_source_angle{};
  int threads = 1;

  void validate() const {
    system.validate();
    if (system.num_elements < 2)
      throw std::invalid_argument("training: need at least two elements to place");
    if (batch_size == 0 || dataset_size < batch_size)
      throw std::invalid_argument("training: dataset must hold at least one batch");
    if (epochs == 0) throw std::invalid_argument("training: need at least one epoch");
    if (!(learning_rate > Scalar(0)))
      throw std::invalid_argument("training: learning rate must be positive");
    if (!(momentum >= Scalar(0) && momentum < Scalar(1)))
      throw std::invalid_argument("training: momentum must lie in [0, 1)");
    if (!(grad_clip_norm > Scalar(0)))
      throw std::invalid_argument("training: clip norm must be positive");
    for (Index h : hidden_dims)
      if (h < 1) throw std::invalid_argument("training: hidden widths must be positive");
    if (threads < 1) throw std::invalid_argument("training: thread count must be positive");
    if (fixed_source_angle) {
      Scene<Scalar> probe{*fixed_source_angle, VecX<Scalar>{}};
      probe.validate();
    }
  }
};

// Per-epoch training record.
template <class Scalar>
struct TrainHistory {
  std::vector<Scalar> mean_loss;
  std::vector<Scalar> mean_sinr_db;
  std::vector<double> seconds;

  std::size_t size() const { return mean_loss.size(); }
};

// Raised when a run diverges or fails to make progress; carries whatever
// history accumulated before the abort so callers can still persist it.
template <class Scalar>
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, TrainHistory<Scalar> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const TrainHistory<Scalar>& history() const { return history_; }

 private:
  TrainHistory<Scalar> history_;
};

// Source angle plus `num_jammers` jammer angles, all uniform over [0, pi].
// The source draw happens first so a fixed source angle consumes no draw
// order from the jammers.
template <class Scalar>
Scene<Scalar> sample_scene(Index num_jammers, rng::Engine& engine,
                           std::optional<Scalar> fixed_source_angle = {}) {
  constexpr double kPi = 3.14159265358979323846;
  Scene<Scalar> s;
  s.source_angle = fixed_source_angle ? *fixed_source_angle
                                      : Scalar(rng::uniform(engine, 0.0, kPi));
  s.jammer_angles.resize(num_jammers);
  for (Index k = 0; k < num_jammers; ++k)
    s.jammer_angles[k] = Scalar(rng::uniform(engine, 0.0, kPi));
  return s;
}

template <class Scalar>
std::vector<Scene<Scalar>> sample_scenes(std::size_t count, Index num_jammers,
                                         rng::Engine& engine,
                                         std::optional<Scalar> fixed_source_angle = {}) {
  std::vector<Scene<Scalar>> scenes;
  scenes.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    scenes.push_back(sample_scene<Scalar>(num_jammers, engine, fixed_source_angle));
  return scenes;
}

// Network input for one scene: source angle first, then the jammers.
template <class Scalar>
VecX<Scalar> featurize(const Scene<Scalar>& scene, Featurization mode) {
  const Index k = scene.num_jammers();
  VecX<Scalar> f(k + 1);
  switch (mode) {
    case Featurization::kNormalizedAngle: {
      const Scalar inv_pi = Scalar(1) / std::numbers::pi_v<Scalar>;
      f[0] = scene.source_angle * inv_pi;
      f.tail(k) = scene.jammer_angles * inv_pi;
      break;
    }
    case Featurization::kCosine:
      f[0] = std::cos(scene.source_angle);
      f.tail(k) = scene.jammer_angles.array().cos();
      break;
  }
  return f;
}

// Layer stack used for positioning: (K+1) inputs, ReLU hidden layers,
// sigmoid output of N-1 spacing ratios.
template <class Scalar>
std::vector<LayerSpec> default_layer_specs(const TrainConfig<Scalar>& cfg) {
  std::vector<LayerSpec> specs;
  Index prev = cfg.system.num_jammers + 1;
  for (Index h : cfg.hidden_dims) {
    specs.push_back({prev, h, Activation::kReLU});
    prev = h;
  }
  specs.push_back({prev, cfg.system.num_elements - 1, Activation::kSigmoid});
  return specs;
}

template <class Scalar>
struct BatchEval {
  Scalar loss = Scalar(0);          // mean reciprocal SINR
  Scalar mean_sinr_db = Scalar(0);  // mean over the batch of 10 log10(sinr)
  MlpGrads<Scalar> grads;           // batch-mean parameter gradient
};

namespace detail {

template <class Scalar>
struct SampleEval {
  Scalar loss = Scalar(0);
  Scalar sinr_db = Scalar(0);
  MlpGrads<Scalar> grads;
};

// Full chain for one scene: features -> ratios -> positions -> optimal SINR,
// then reciprocal-SINR loss pulled back through the position map into the
// network parameters.
template <class Scalar>
SampleEval<Scalar> eval_sample(const MlpParams<Scalar>& params, const Scene<Scalar>& scene,
                               const TrainConfig<Scalar>& cfg) {
  const VecX<Scalar> feats = featurize(scene, cfg.features);
  ForwardResult<Scalar> fwd = forward(params, feats);
  if (!fwd.ratios.values.allFinite())
    throw TrainingError<Scalar>("training diverged: non-finite network output", {});
  const LayoutResult<Scalar> lay = ratios_to_positions(fwd.ratios, cfg.system);
  const Scalar eta = optimal_sinr(lay.layout, scene, cfg.system);
  if (!(eta > Scalar(0)) || !std::isfinite(static_cast<double>(eta)))
    throw TrainingError<Scalar>(
        "training diverged: non-positive or non-finite SINR for source angle " +
            std::to_string(static_cast<double>(scene.source_angle)),
        {});
  const VecX<Scalar> grad_x = sinr_position_gradient(lay.layout, scene, cfg.system);
  const MatX<Scalar> jac = positions_jacobian(fwd.ratios, cfg.system);
  // d(1/eta)/d r = -1/eta^2 * J^T d eta/d x
  const VecX<Scalar> grad_ratios = (-Scalar(1) / (eta * eta)) * (jac.transpose() * grad_x);
  SampleEval<Scalar> out;
  out.loss = Scalar(1) / eta;
  out.sinr_db = Scalar(10) * std::log10(eta);
  out.grads = backward(params, fwd.cache, grad_ratios);
  return out;
}

template <class Scalar>
void accumulate(MlpGrads<Scalar>& into, const MlpGrads<Scalar>& from) {
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    into.weights[l] += from.weights[l];
    into.biases[l] += from.biases[l];
  }
}

}  // namespace detail

// Loss, gradient and mean SINR over one batch of scenes. With cfg.threads
// greater than one the per-sample evaluations run in parallel but the
// reduction always sums in sample order, so the result is bit-identical to
// the serial one.
template <class Scalar>
BatchEval<Scalar> loss_and_grads(const MlpParams<Scalar>& params,
                                 const std::vector<const Scene<Scalar>*>& batch,
                                 const TrainConfig<Scalar>& cfg) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grads: empty batch");
  const std::size_t count = batch.size();
  std::vector<detail::SampleEval<Scalar>> evals(count);

  if (cfg.threads <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i)
      evals[i] = detail::eval_sample(params, *batch[i], cfg);
  } else {
    const std::size_t workers = std::min<std::size_t>(cfg.threads, count);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers)
            evals[i] = detail::eval_sample(params, *batch[i], cfg);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

  BatchEval<Scalar> out;
  out.grads = zero_grads_like(params);
  for (std::size_t i = 0; i < count; ++i) {
    out.loss += evals[i].loss;
    out.mean_sinr_db += evals[i].sinr_db;
    detail::accumulate(out.grads, evals[i].grads);
  }
  const Scalar inv = Scalar(1) / Scalar(count);
  out.loss *= inv;
  out.mean_sinr_db *= inv;
  for (std::size_t l = 0; l < out.grads.weights.size(); ++l) {
    out.grads.weights[l] *= inv;
    out.grads.biases[l] *= inv;
  }
  return out;
}

template <class Scalar>
BatchEval<Scalar> loss_and_grads(const MlpParams<Scalar>& params,
                                 const std::vector<Scene<Scalar>>& batch,
                                 const TrainConfig<Scalar>& cfg) {
  std::vector<const Scene<Scalar>*> ptrs(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) ptrs[i] = &batch[i];
  return loss_and_grads(params, ptrs, cfg);
}

template <class Scalar>
struct TrainResult {
  MlpParams<Scalar> params;
  TrainHistory<Scalar> history;
};

// Unsupervised training on the provided scenes: minimize the batch-mean
// reciprocal of the optimal SINR. Deterministic for a fixed config: dataset
// order, shuffles and parameter init all derive from cfg.seed. Trailing
// samples that do not fill a batch are skipped each epoch.
template <class Scalar>
TrainResult<Scalar> train(const TrainConfig<Scalar>& cfg,
                          const std::vector<Scene<Scalar>>& dataset) {
  cfg.validate();
  if (dataset.size() < cfg.batch_size)
    throw std::invalid_argument("train: dataset smaller than one batch");
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].num_jammers() != cfg.system.num_jammers)
      throw std::invalid_argument("train: scene " + std::to_string(i + 1) +
                                  " has the wrong jammer count");

  TrainResult<Scalar> result;
  result.params = init_params<Scalar>(default_layer_specs(cfg), cfg.seed);
  MlpGrads<Scalar> velocity;
  if (cfg.momentum > Scalar(0)) velocity = zero_grads_like(result.params);

  const std::size_t steps = dataset.size() / cfg.batch_size;
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<const Scene<Scalar>*> batch(cfg.batch_size);

  TrainHistory<Scalar>& history = result.history;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng::Engine shuffler = rng::make_engine(cfg.seed, kShuffleStreamBase + epoch);
    rng::shuffle(order, shuffler);
    Scalar loss_sum = Scalar(0);
    Scalar db_sum = Scalar(0);
    try {
      for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t b = 0; b < cfg.batch_size; ++b)
          batch[b] = &dataset[order[s * cfg.batch_size + b]];
        BatchEval<Scalar> eval = loss_and_grads(result.params, batch, cfg);
        clip_gradients(eval.grads, cfg.grad_clip_norm);
        if (cfg.momentum > Scalar(0)) {
          for (std::size_t l = 0; l < velocity.weights.size(); ++l) {
            velocity.weights[l] = cfg.momentum * velocity.weights[l] + eval.grads.weights[l];
            velocity.biases[l] = cfg.momentum * velocity.biases[l] + eval.grads.biases[l];
          }
          sgd_step(result.params, velocity, cfg.learning_rate);
        } else {
          sgd_step(result.params, eval.grads, cfg.learning_rate);
        }
        loss_sum += eval.loss;
        db_sum += eval.mean_sinr_db;
      }
    } catch (const TrainingError<Scalar>& e) {
      throw TrainingError<Scalar>(e.what(), history);
    } catch (const std::runtime_error& e) {
      throw TrainingError<Scalar>(std::string("training diverged: ") + e.what(), history);
    }
    history.mean_loss.push_back(loss_sum / Scalar(steps));
    history.mean_sinr_db.push_back(db_sum / Scalar(steps));
    history.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  // The epoch means are accumulated in shuffle order, so two epochs over the
  // same samples can differ in the last ulps; a stationary run (for example a
  // region that pins every layout) must not trip the guard on that noise.
  const Scalar first = history.mean_sinr_db.front();
  const Scalar rounding = Scalar(1e-9) * std::max(std::abs(first), Scalar(1));
  if (history.mean_sinr_db.back() < first - rounding)
    throw TrainingError<Scalar>(
        "training made no progress: final epoch mean SINR fell below the first",
        history);
  return result;
}

// Same, with the dataset sampled internally from cfg.seed.
template <class Scalar>
TrainResult<Scalar> train(const TrainConfig<Scalar>& cfg) {
  cfg.validate();
  rng::Engine engine = rng::make_engine(cfg.seed, kDatasetStream);
  const std::vector<Scene<Scalar>> dataset = sample_scenes<Scalar>(
      cfg.dataset_size, cfg.system.num_jammers, engine, cfg.fixed_source_angle);
  return train(cfg, dataset);
}

template <class Scalar>
struct InferenceResult {
  ArrayLayout<Scalar> layout;
  Beamformer<Scalar> beamformer;
  Scalar sinr = Scalar(0);  // linear
};

// Deploy path: network placement for the scene, then the closed-form
// beamformer on the resulting geometry.
template <class Scalar>
InferenceResult<Scalar> infer(const MlpParams<Scalar>& params, const Scene<Scalar>& scene,
                              const TrainConfig<Scalar>& cfg) {
  if (params.input_dim() != scene.num_jammers() + 1)
    throw std::invalid_argument("infer: model expects " +
                                std::to_string(params.input_dim() - 1) + " jammers, scene has " +
                                std::to_string(scene.num_jammers()));
  if (params.output_dim() != cfg.system.num_elements - 1)
    throw std::invalid_argument("infer: model places " +
                                std::to_string(params.output_dim() + 1) +
                                " elements, config asks for " +
                                std::to_string(cfg.system.num_elements));
  const VecX<Scalar> feats = featurize(scene, cfg.features);
  const ForwardResult<Scalar> fwd = forward(params, feats);
  const LayoutResult<Scalar> lay = ratios_to_positions(fwd.ratios, cfg.system);
  BeamformingSolution<Scalar> sol = optimal_beamformer(lay.layout, scene, cfg.system);
  return {lay.layout, std::move(sol.beamformer), sol.sinr};
}

// Writes the per-epoch record as CSV: epoch,mean_loss,mean_sinr_db,seconds.
template <class Scalar>
void write_history_csv(const std::filesystem::path& path, const TrainHistory<Scalar>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_history_csv: cannot open " + path.string());
  out << "epoch,mean_loss,mean_sinr_db,seconds\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    out << (e + 1) << ',' << detail::format_double(static_cast<double>(history.mean_loss[e]))
        << ',' << detail::format_double(static_cast<double>(history.mean_sinr_db[e])) << ','
        << detail::format_double(history.seconds[e]) << '\n';
  }
  if (!out) throw std::runtime_error("write_history_csv: write failed for " + path.string());
}

}  // namespace movant
