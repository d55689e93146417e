#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "movant/baselines.hpp"
#include "movant/training.hpp"

#include "check_utils.hpp"

using namespace movant;

namespace {

constexpr double kPi = 3.14159265358979323846;

TrainConfig<double> tiny_config() {
  TrainConfig<double> cfg;
  cfg.system.num_elements = 4;
  cfg.system.num_jammers = 2;
  cfg.dataset_size = 200;
  cfg.batch_size = 50;
  cfg.epochs = 2;
  cfg.hidden_dims = {8};
  cfg.seed = 7;
  return cfg;
}

MlpParams<double> zero_network(const TrainConfig<double>& cfg) {
  MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 0);
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    params.weights[l].setZero();
    params.biases[l].setZero();
  }
  return params;
}

bool params_equal(const MlpParams<double>& a, const MlpParams<double>& b) {
  if (a.num_layers() != b.num_layers()) return false;
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    if (!(a.weights[l].array() == b.weights[l].array()).all()) return false;
    if (!(a.biases[l].array() == b.biases[l].array()).all()) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("scene sampling is deterministic and stays inside [0, pi]") {
  rng::Engine a = rng::make_engine(3, kDatasetStream);
  rng::Engine b = rng::make_engine(3, kDatasetStream);
  const Scene<double> s1 = sample_scene<double>(3, a);
  const Scene<double> s2 = sample_scene<double>(3, b);
  CHECK(s1.source_angle == s2.source_angle);
  CHECK((s1.jammer_angles.array() == s2.jammer_angles.array()).all());

  rng::Engine eng = rng::make_engine(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const Scene<double> s = sample_scene<double>(2, eng);
    CHECK(s.source_angle >= 0.0);
    CHECK(s.source_angle <= kPi);
    CHECK((s.jammer_angles.array() >= 0.0).all());
    CHECK((s.jammer_angles.array() <= kPi).all());
  }

  const Scene<double> bare = sample_scene<double>(0, eng);
  CHECK(bare.num_jammers() == 0);
}

TEST_CASE("source angles average to pi/2 over many draws") {
  rng::Engine eng = rng::make_engine(2024, kDatasetStream);
  double sum = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += sample_scene<double>(0, eng).source_angle;
  CHECK(std::abs(sum / draws - kPi / 2) < 0.01);
}

TEST_CASE("a fixed source angle consumes no draws from the jammer stream") {
  rng::Engine fixed_eng = rng::make_engine(9);
  rng::Engine free_eng = rng::make_engine(9);
  const Scene<double> fixed = sample_scene<double>(2, fixed_eng, 1.0);
  CHECK(fixed.source_angle == 1.0);
  // the same engine state must feed the jammers either way
  CHECK(fixed.jammer_angles[0] == rng::uniform(free_eng, 0.0, kPi));
  CHECK(fixed.jammer_angles[1] == rng::uniform(free_eng, 0.0, kPi));
}

TEST_CASE("featurization maps angles into the documented ranges") {
  Scene<double> s;
  s.source_angle = kPi / 2;
  s.jammer_angles.resize(2);
  s.jammer_angles << 0.0, kPi;

  const VecX<double> norm = featurize(s, Featurization::kNormalizedAngle);
  REQUIRE(norm.size() == 3);
  CHECK(norm[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(norm[1] == 0.0);
  CHECK(norm[2] == doctest::Approx(1.0).epsilon(1e-12));

  const VecX<double> cosine = featurize(s, Featurization::kCosine);
  CHECK(std::abs(cosine[0]) < 1e-15);
  CHECK(cosine[1] == 1.0);
  CHECK(cosine[2] == -1.0);

  // source always sits in slot zero
  s.source_angle = 3.0;
  CHECK(featurize(s, Featurization::kNormalizedAngle)[0] ==
        doctest::Approx(3.0 / kPi).epsilon(1e-12));
}

TEST_CASE("default layer stack is input -> hidden relu layers -> sigmoid ratios") {
  TrainConfig<double> cfg;  // N=8, K=3, hidden 128x128
  const std::vector<LayerSpec> specs = default_layer_specs(cfg);
  REQUIRE(specs.size() == 3);
  CHECK(specs[0].input_dim == 4);
  CHECK(specs[0].output_dim == 128);
  CHECK(specs[0].activation == Activation::kReLU);
  CHECK(specs[1].input_dim == 128);
  CHECK(specs[1].output_dim == 128);
  CHECK(specs[2].input_dim == 128);
  CHECK(specs[2].output_dim == 7);
  CHECK(specs[2].activation == Activation::kSigmoid);

  TrainConfig<double> small = tiny_config();
  const std::vector<LayerSpec> small_specs = default_layer_specs(small);
  REQUIRE(small_specs.size() == 2);
  CHECK(small_specs[0].input_dim == 3);
  CHECK(small_specs[0].output_dim == 8);
  CHECK(small_specs[1].output_dim == 3);
}

TEST_CASE("loss is the reciprocal of the optimal sinr") {
  // no jammers: sinr is elements/noise regardless of layout, so eta = 20
  TrainConfig<double> cfg;
  cfg.system.num_elements = 5;
  cfg.system.num_jammers = 0;
  cfg.system.noise_power = 0.25;
  const MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 3);
  Scene<double> s;
  s.source_angle = 1.0;
  const BatchEval<double> eval = loss_and_grads(params, std::vector<Scene<double>>{s}, cfg);
  CHECK(testutil::rel_err(eval.loss, 0.05) < 1e-12);
  CHECK(testutil::rel_err(eval.mean_sinr_db, 10.0 * std::log10(20.0)) < 1e-12);
}

TEST_CASE("a batch of identical scenes reproduces the single-scene evaluation") {
  TrainConfig<double> cfg = tiny_config();
  const MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 21);
  rng::Engine eng = rng::make_engine(4);
  const Scene<double> s = sample_scene<double>(cfg.system.num_jammers, eng);

  const BatchEval<double> one = loss_and_grads(params, std::vector<Scene<double>>{s}, cfg);
  const BatchEval<double> two = loss_and_grads(params, std::vector<Scene<double>>{s, s}, cfg);
  CHECK(one.loss == two.loss);
  CHECK(one.mean_sinr_db == two.mean_sinr_db);
  for (std::size_t l = 0; l < one.grads.weights.size(); ++l) {
    CHECK((one.grads.weights[l].array() == two.grads.weights[l].array()).all());
    CHECK((one.grads.biases[l].array() == two.grads.biases[l].array()).all());
  }
}

TEST_CASE("empty batches are rejected") {
  TrainConfig<double> cfg = tiny_config();
  const MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 21);
  CHECK_THROWS_AS(loss_and_grads(params, std::vector<Scene<double>>{}, cfg),
                  std::invalid_argument);
}

TEST_CASE("end-to-end parameter gradient matches finite differences") {
  TrainConfig<double> cfg;
  cfg.system.num_elements = 4;
  cfg.system.num_jammers = 2;
  cfg.hidden_dims = {6};
  MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 17);
  rng::Engine eng = rng::make_engine(23);
  const std::vector<Scene<double>> batch = sample_scenes<double>(3, 2, eng);

  const BatchEval<double> eval = loss_and_grads(params, batch, cfg);
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    for (Index r = 0; r < params.weights[l].rows(); ++r) {
      for (Index c = 0; c < params.weights[l].cols(); ++c) {
        const double saved = params.weights[l](r, c);
        params.weights[l](r, c) = saved + h;
        const double up = loss_and_grads(params, batch, cfg).loss;
        params.weights[l](r, c) = saved - h;
        const double down = loss_and_grads(params, batch, cfg).loss;
        params.weights[l](r, c) = saved;
        worst = std::max(worst, testutil::rel_err(eval.grads.weights[l](r, c),
                                                  (up - down) / (2 * h)));
      }
      const double saved = params.biases[l][r];
      params.biases[l][r] = saved + h;
      const double up = loss_and_grads(params, batch, cfg).loss;
      params.biases[l][r] = saved - h;
      const double down = loss_and_grads(params, batch, cfg).loss;
      params.biases[l][r] = saved;
      worst = std::max(worst, testutil::rel_err(eval.grads.biases[l][r], (up - down) / (2 * h)));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("non-finite parameters surface as a training error") {
  TrainConfig<double> cfg = tiny_config();
  MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 21);
  params.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  rng::Engine eng = rng::make_engine(4);
  const std::vector<Scene<double>> batch = sample_scenes<double>(2, cfg.system.num_jammers, eng);
  CHECK_THROWS_AS(loss_and_grads(params, batch, cfg), TrainingError<double>);
}

TEST_CASE("training is deterministic and thread count does not change the bits") {
  const TrainConfig<double> cfg = tiny_config();
  const TrainResult<double> first = train(cfg);
  const TrainResult<double> second = train(cfg);
  REQUIRE(first.history.size() == cfg.epochs);
  CHECK(first.history.mean_loss == second.history.mean_loss);
  CHECK(first.history.mean_sinr_db == second.history.mean_sinr_db);
  CHECK(params_equal(first.params, second.params));

  TrainConfig<double> threaded = cfg;
  threaded.threads = 4;
  const TrainResult<double> parallel = train(threaded);
  CHECK(parallel.history.mean_loss == first.history.mean_loss);
  CHECK(params_equal(parallel.params, first.params));
}

TEST_CASE("one batch of one sample takes exactly one step") {
  TrainConfig<double> cfg = tiny_config();
  cfg.dataset_size = 1;
  cfg.batch_size = 1;
  cfg.epochs = 1;
  const MlpParams<double> init = init_params<double>(default_layer_specs(cfg), cfg.seed);
  const TrainResult<double> result = train(cfg);
  REQUIRE(result.history.size() == 1);
  CHECK_FALSE(params_equal(result.params, init));
}

TEST_CASE("training rejects inconsistent configs and datasets") {
  TrainConfig<double> cfg = tiny_config();

  TrainConfig<double> bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(bad), std::invalid_argument);
  bad = cfg;
  bad.dataset_size = 10;
  bad.batch_size = 20;
  CHECK_THROWS_AS(train(bad), std::invalid_argument);
  bad = cfg;
  bad.epochs = 0;
  CHECK_THROWS_AS(train(bad), std::invalid_argument);
  bad = cfg;
  bad.learning_rate = 0;
  CHECK_THROWS_AS(train(bad), std::invalid_argument);
  bad = cfg;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(train(bad), std::invalid_argument);
  bad = cfg;
  bad.threads = 0;
  CHECK_THROWS_AS(train(bad), std::invalid_argument);
  bad = cfg;
  bad.hidden_dims = {0};
  CHECK_THROWS_AS(train(bad), std::invalid_argument);

  // explicit datasets must match the configured jammer count and batch size
  rng::Engine eng = rng::make_engine(1);
  CHECK_THROWS_AS(train(cfg, sample_scenes<double>(10, cfg.system.num_jammers, eng)),
                  std::invalid_argument);
  std::vector<Scene<double>> wrong = sample_scenes<double>(cfg.dataset_size, 1, eng);
  CHECK_THROWS_WITH_AS(train(cfg, wrong), doctest::Contains("jammer"), std::invalid_argument);
}

TEST_CASE("inference validates model dimensions against scene and system") {
  TrainConfig<double> cfg = tiny_config();
  const MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 2);
  rng::Engine eng = rng::make_engine(6);

  const Scene<double> wrong_k = sample_scene<double>(3, eng);
  CHECK_THROWS_AS(infer(params, wrong_k, cfg), std::invalid_argument);

  TrainConfig<double> wrong_n = cfg;
  wrong_n.system.num_elements = 6;
  const Scene<double> s = sample_scene<double>(cfg.system.num_jammers, eng);
  CHECK_THROWS_AS(infer(params, s, wrong_n), std::invalid_argument);
}

TEST_CASE("inference output is self-consistent and feasible") {
  TrainConfig<double> cfg = tiny_config();
  const MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 12);
  rng::Engine eng = rng::make_engine(8);
  for (int rep = 0; rep < 200; ++rep) {
    const Scene<double> s = sample_scene<double>(cfg.system.num_jammers, eng);
    const InferenceResult<double> res = infer(params, s, cfg);
    CHECK(validate_layout(res.layout, cfg.system).empty());
    const double recomputed = sinr(res.layout, res.beamformer, s, cfg.system);
    CHECK(testutil::rel_err(res.sinr, recomputed) < 1e-9);
  }
}

TEST_CASE("any network output stays feasible across many random scenes") {
  TrainConfig<double> cfg;  // defaults: N=8, K=3
  const MlpParams<double> params = init_params<double>(default_layer_specs(cfg), 99);
  rng::Engine eng = rng::make_engine(14);
  for (int rep = 0; rep < 10000; ++rep) {
    const Scene<double> s = sample_scene<double>(cfg.system.num_jammers, eng);
    const ForwardResult<double> fwd = forward(params, featurize(s, cfg.features));
    const LayoutResult<double> lay = ratios_to_positions(fwd.ratios, cfg.system);
    CHECK(validate_layout(lay.layout, cfg.system).empty());
  }
}

TEST_CASE("the zero network reproduces the fixed-position geometry") {
  TrainConfig<double> cfg;  // N=8, d_min=0.5, L=7: double spacing exactly fits
  const MlpParams<double> params = zero_network(cfg);
  rng::Engine eng = rng::make_engine(31);
  const Scene<double> s = sample_scene<double>(cfg.system.num_jammers, eng);

  const ForwardResult<double> fwd = forward(params, featurize(s, cfg.features));
  CHECK((fwd.ratios.values.array() == 0.5).all());

  const InferenceResult<double> res = infer(params, s, cfg);
  const ArrayLayout<double> reference = fpv_layout(cfg.system);
  CHECK((res.layout.positions.array() == reference.positions.array()).all());
}

TEST_CASE("a region that pins the layout leaves training stationary, not failed") {
  // L = (N-1) d_min admits exactly one feasible layout, so every gradient is
  // zero and all epochs report the same mean up to summation order
  TrainConfig<double> cfg;
  cfg.system.region_size = 3.5;
  cfg.dataset_size = 200;
  cfg.batch_size = 50;
  cfg.epochs = 3;
  cfg.hidden_dims = {8};
  cfg.seed = 13;
  const MlpParams<double> init = init_params<double>(default_layer_specs(cfg), cfg.seed);
  const TrainResult<double> result = train(cfg);
  CHECK(params_equal(result.params, init));

  rng::Engine eng = rng::make_engine(2);
  const Scene<double> s = sample_scene<double>(cfg.system.num_jammers, eng);
  const InferenceResult<double> res = infer(result.params, s, cfg);
  for (Index i = 0; i < res.layout.positions.size(); ++i)
    CHECK(res.layout.positions[i] == 0.5 * static_cast<double>(i));
}

TEST_CASE("a short run beats random positioning on held-out scenes") {
  TrainConfig<double> cfg;  // N=8, K=3 defaults
  cfg.dataset_size = 10000;
  cfg.epochs = 5;
  cfg.seed = 2024;
  const TrainResult<double> result = train(cfg);
  REQUIRE(result.history.size() == 5);
  CHECK(result.history.mean_sinr_db.back() >= result.history.mean_sinr_db.front());

  rng::Engine eng = rng::make_engine(cfg.seed, kHoldoutStream);
  const std::vector<Scene<double>> holdout = sample_scenes<double>(1000, 3, eng);
  double learned = 0, random_baseline = 0;
  for (std::size_t t = 0; t < holdout.size(); ++t) {
    learned += infer(result.params, holdout[t], cfg).sinr;
    rng::Engine trial = rng::make_engine(cfg.seed, 1000 + t);
    random_baseline += rpb(holdout[t], cfg.system, trial).sinr;
  }
  CHECK(learned / holdout.size() > random_baseline / holdout.size());
}

}  // TEST_SUITE
