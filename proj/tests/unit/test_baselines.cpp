#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "movant/baselines.hpp"
#include "movant/training.hpp"

#include "check_utils.hpp"

using namespace movant;

namespace {

constexpr double kPi = 3.14159265358979323846;

SystemConfig<double> default_cfg() { return {}; }  // N=8, K=3, L=7, d_min=0.5

Scene<double> scene_of(double source, std::initializer_list<double> jammers) {
  Scene<double> s;
  s.source_angle = source;
  s.jammer_angles.resize(static_cast<Index>(jammers.size()));
  Index i = 0;
  for (double j : jammers) s.jammer_angles[i++] = j;
  return s;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("fixed layout pins elements at twice the minimum spacing") {
  const ArrayLayout<double> layout = fpv_layout(default_cfg());
  REQUIRE(layout.size() == 8);
  for (Index i = 0; i < 8; ++i) CHECK(layout.positions[i] == static_cast<double>(i));
}

TEST_CASE("fixed layout rejects regions too small for double spacing") {
  SystemConfig<double> cfg = default_cfg();
  CHECK(fpv_feasible(cfg));  // 7 * 1 = 7 fits the 7-wavelength region exactly
  cfg.num_elements = 10;     // needs 9 wavelengths
  CHECK_FALSE(fpv_feasible(cfg));
  rng::Engine eng = rng::make_engine(3);
  const Scene<double> s = sample_scene<double>(cfg.num_jammers, eng);
  CHECK_THROWS_AS(fpv(s, cfg), std::invalid_argument);
}

TEST_CASE("fixed scheme with no jammers reaches the isotropic optimum") {
  SystemConfig<double> cfg = default_cfg();
  cfg.num_jammers = 0;
  const BaselineResult<double> res = fpv(scene_of(1.2, {}), cfg);
  CHECK(testutil::rel_err(res.sinr, cfg.num_elements / cfg.noise_power) < 1e-12);
}

TEST_CASE("every baseline result is consistent with its own layout and beamformer") {
  const SystemConfig<double> cfg = default_cfg();
  rng::Engine eng = rng::make_engine(17);
  for (int rep = 0; rep < 20; ++rep) {
    const Scene<double> s = sample_scene<double>(cfg.num_jammers, eng);

    const BaselineResult<double> fixed = fpv(s, cfg);
    CHECK(testutil::rel_err(fixed.sinr, sinr(fixed.layout, fixed.beamformer, s, cfg)) < 1e-9);

    rng::Engine rpb_eng = rng::make_engine(100 + rep);
    const BaselineResult<double> random = rpb(s, cfg, rpb_eng);
    CHECK(testutil::rel_err(random.sinr, sinr(random.layout, random.beamformer, s, cfg)) < 1e-9);

    const AoResult<double> opt = ao(s, cfg);
    CHECK(testutil::rel_err(opt.sinr, sinr(opt.layout, opt.beamformer, s, cfg)) < 1e-9);
  }
}

TEST_CASE("random scheme is reproducible and always feasible") {
  const SystemConfig<double> cfg = default_cfg();
  rng::Engine a = rng::make_engine(5);
  rng::Engine b = rng::make_engine(5);
  const Scene<double> s = scene_of(1.0, {0.4, 2.0, 2.8});
  const BaselineResult<double> first = rpb(s, cfg, a);
  const BaselineResult<double> second = rpb(s, cfg, b);
  CHECK((first.layout.positions.array() == second.layout.positions.array()).all());
  CHECK((first.beamformer.weights.array() == second.beamformer.weights.array()).all());
  CHECK(first.sinr == second.sinr);

  rng::Engine eng = rng::make_engine(6);
  for (int rep = 0; rep < 1000; ++rep) {
    const BaselineResult<double> res = rpb(s, cfg, eng);
    CHECK(validate_layout(res.layout, cfg).empty());
    CHECK(std::abs(res.beamformer.weights.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("random positioning loses to the fixed layout on average") {
  const SystemConfig<double> cfg = default_cfg();
  rng::Engine scene_eng = rng::make_engine(2024);
  double fixed_sum = 0, random_sum = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const Scene<double> s = sample_scene<double>(cfg.num_jammers, scene_eng);
    fixed_sum += fpv(s, cfg).sinr;
    rng::Engine trial = rng::make_engine(9000 + t);
    random_sum += rpb(s, cfg, trial).sinr;
  }
  CHECK(random_sum < fixed_sum);
}

TEST_CASE("coordinate search with no jammers keeps the start since every candidate ties") {
  SystemConfig<double> cfg = default_cfg();
  cfg.num_jammers = 0;
  const AoResult<double> res = ao(scene_of(0.9, {}), cfg);
  CHECK(testutil::rel_err(res.sinr, cfg.num_elements / cfg.noise_power) < 1e-12);
  const ArrayLayout<double> start = fpv_layout(cfg);
  CHECK((res.layout.positions.array() == start.positions.array()).all());
}

TEST_CASE("coordinate search never falls below its fixed-layout start") {
  const SystemConfig<double> cfg = default_cfg();
  rng::Engine eng = rng::make_engine(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Scene<double> s = sample_scene<double>(cfg.num_jammers, eng);
    const double fixed = fpv(s, cfg).sinr;
    const AoResult<double> res = ao(s, cfg);
    CHECK(res.sinr >= fixed * (1.0 - 1e-12));
    CHECK(res.sweeps >= 1);
    CHECK(res.sweeps <= AoConfig<double>{}.max_sweeps);
    CHECK(validate_layout(res.layout, cfg).empty());
  }
}

TEST_CASE("two-element search reaches the global optimum of an exhaustive grid") {
  SystemConfig<double> cfg = default_cfg();
  cfg.num_elements = 2;
  cfg.num_jammers = 1;
  const Scene<double> s = scene_of(kPi / 2, {0.0});

  // closed form for one jammer and two elements: the objective depends only
  // on the element gap through the jammer correlation magnitude
  const double u0 = std::cos(s.source_angle);
  const double u1 = std::cos(s.jammer_angles[0]);
  const double sigma2 = cfg.noise_power;
  const auto eta_of = [&](double x1, double x2) {
    const double cross = 2.0 + 2.0 * std::cos(2.0 * kPi * (x2 - x1) * (u0 - u1));
    return (2.0 - cross / (sigma2 + 2.0)) / sigma2;
  };

  const double step = 1e-3;
  double grid_best = 0;
  for (double x1 = 0; x1 <= cfg.region_size; x1 += step)
    for (double x2 = x1 + cfg.min_spacing; x2 <= cfg.region_size; x2 += step)
      grid_best = std::max(grid_best, eta_of(x1, x2));

  const double fixed = fpv(s, cfg).sinr;
  const AoResult<double> res = ao(s, cfg);
  CHECK(res.sinr >= fixed);
  CHECK(res.sinr >= 0.999 * grid_best);
}

TEST_CASE("coordinate search honours the sweep cap") {
  const SystemConfig<double> cfg = default_cfg();
  AoConfig<double> one_sweep;
  one_sweep.max_sweeps = 1;
  const Scene<double> s = scene_of(2.0, {0.5, 1.2, 2.6});
  const AoResult<double> res = ao(s, cfg, one_sweep);
  CHECK(res.sweeps == 1);
}

TEST_CASE("coordinate search falls back to a uniform span when double spacing does not fit") {
  SystemConfig<double> cfg = default_cfg();
  cfg.num_elements = 10;  // fixed layout needs 9 wavelengths, region holds 7
  REQUIRE_FALSE(fpv_feasible(cfg));
  rng::Engine eng = rng::make_engine(19);
  const Scene<double> s = sample_scene<double>(cfg.num_jammers, eng);
  const AoResult<double> res = ao(s, cfg);
  CHECK(res.sinr > 0.0);
  CHECK(validate_layout(res.layout, cfg).empty());
}

TEST_CASE("search configuration is validated") {
  const SystemConfig<double> cfg = default_cfg();
  const Scene<double> s = scene_of(1.0, {0.2, 1.5, 2.0});
  AoConfig<double> bad;
  bad.grid_points = 1;
  CHECK_THROWS_AS(ao(s, cfg, bad), std::invalid_argument);
  bad = {};
  bad.max_sweeps = 0;
  CHECK_THROWS_AS(ao(s, cfg, bad), std::invalid_argument);
  bad = {};
  bad.rel_tolerance = -1.0;
  CHECK_THROWS_AS(ao(s, cfg, bad), std::invalid_argument);
}

}  // TEST_SUITE
