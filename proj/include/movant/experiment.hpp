#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "movant/baselines.hpp"
#include "movant/io.hpp"
#include "movant/training.hpp"
#include "movant/types.hpp"

namespace movant {

inline constexpr std::uint64_t kSweepSceneStream = 4;
inline constexpr std::uint64_t kBenchSceneStreamBase = 1u << 17;
inline constexpr std::uint64_t kRpbTrialStreamBase = 1u << 20;
inline constexpr std::uint64_t kPointTrainStreamBase = 1u << 24;

enum class Scheme { kLearned, kAo, kFpv, kRpb };

inline std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kLearned: return "learned";
    case Scheme::kAo: return "ao";
    case Scheme::kFpv: return "fpv";
    case Scheme::kRpb: return "rpb";
  }
  throw std::logic_error("unknown scheme");
}

inline Scheme scheme_from_name(std::string_view name) {
  if (name == "learned") return Scheme::kLearned;
  if (name == "ao") return Scheme::kAo;
  if (name == "fpv") return Scheme::kFpv;
  if (name == "rpb") return Scheme::kRpb;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

enum class SweepVariable { kNumElements, kRegionSize, kNumJammers };

inline std::string_view sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::kNumElements: return "elements";
    case SweepVariable::kRegionSize: return "region";
    case SweepVariable::kNumJammers: return "jammers";
  }
  throw std::logic_error("unknown sweep variable");
}

inline SweepVariable sweep_variable_from_name(std::string_view name) {
  if (name == "elements") return SweepVariable::kNumElements;
  if (name == "region") return SweepVariable::kRegionSize;
  if (name == "jammers") return SweepVariable::kNumJammers;
  throw std::invalid_argument("unknown sweep variable '" + std::string(name) + "'");
}

template <class Scalar>
struct SweepSpec {
  SweepVariable variable = SweepVariable::kNumElements;
  std::vector<Scalar> values;
  Index trials = 200;
  std::vector<Scheme> schemes{Scheme::kLearned, Scheme::kAo, Scheme::kFpv, Scheme::kRpb};
  std::uint64_t seed = 0;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("sweep: need at least one value");
    if (trials < 1) throw std::invalid_argument("sweep: need at least one trial");
    if (schemes.empty()) throw std::invalid_argument("sweep: need at least one scheme");
    for (const Scalar v : values) {
      if (!(v > Scalar(0)))
        throw std::invalid_argument("sweep: values must be positive");
      if (variable != SweepVariable::kRegionSize &&
          v != std::floor(static_cast<double>(v)))
        throw std::invalid_argument("sweep: counts must be whole numbers");
    }
  }
};

// Knobs shared by the sweep and benchmark drivers. The training template
// carries the budget for per-point retraining; its system block and seed are
// overwritten point by point.
template <class Scalar>
struct ExperimentConfig {
  SystemConfig<Scalar> base_system{};
  TrainConfig<Scalar> train_template{};
  AoConfig<Scalar> ao{};
  const MlpParams<Scalar>* reuse_model = nullptr;  // used when dimensions fit
};

template <class Scalar>
struct SweepCell {
  Scalar variable_value = Scalar(0);
  Scheme scheme = Scheme::kLearned;
  std::vector<Scalar> sinrs;        // linear, one per trial
  std::vector<double> runtime_ms;   // placement plus beamforming, one per trial
};

template <class Scalar>
struct SweepRow {
  Scalar variable_value = Scalar(0);
  Scheme scheme = Scheme::kLearned;
  Scalar mean_sinr_db = Scalar(0);  // mean over trials of 10 log10(sinr)
  Scalar std_sinr_db = Scalar(0);   // sample standard deviation of the same
  double mean_runtime_ms = 0;
};

template <class Scalar>
struct SweepResult {
  std::vector<SweepRow<Scalar>> rows;
  std::vector<SweepCell<Scalar>> cells;
};

namespace detail {

template <class Scalar>
SystemConfig<Scalar> apply_sweep_value(const SystemConfig<Scalar>& base, SweepVariable var,
                                       Scalar value) {
  SystemConfig<Scalar> cfg = base;
  switch (var) {
    case SweepVariable::kNumElements: cfg.num_elements = static_cast<Index>(value); break;
    case SweepVariable::kRegionSize: cfg.region_size = value; break;
    case SweepVariable::kNumJammers: cfg.num_jammers = static_cast<Index>(value); break;
  }
  return cfg;
}

// Scene with the first `count` jammers of `master`, same source.
template <class Scalar>
Scene<Scalar> jammer_prefix(const Scene<Scalar>& master, Index count) {
  Scene<Scalar> s;
  s.source_angle = master.source_angle;
  s.jammer_angles = master.jammer_angles.head(count);
  return s;
}

template <class Scalar>
void push_stats(std::vector<SweepRow<Scalar>>& rows, const SweepCell<Scalar>& cell) {
  SweepRow<Scalar> row;
  row.variable_value = cell.variable_value;
  row.scheme = cell.scheme;
  const std::size_t count = cell.sinrs.size();
  Scalar mean = Scalar(0);
  for (const Scalar eta : cell.sinrs) mean += Scalar(10) * std::log10(eta);
  mean /= Scalar(count);
  Scalar var = Scalar(0);
  for (const Scalar eta : cell.sinrs) {
    const Scalar d = Scalar(10) * std::log10(eta) - mean;
    var += d * d;
  }
  row.mean_sinr_db = mean;
  row.std_sinr_db = count > 1 ? std::sqrt(var / Scalar(count - 1)) : Scalar(0);
  double ms = 0;
  for (const double t : cell.runtime_ms) ms += t;
  row.mean_runtime_ms = ms / static_cast<double>(count);
  rows.push_back(row);
}

template <class Scalar>
MlpParams<Scalar> train_for_point(const ExperimentConfig<Scalar>& exp_cfg,
                                  const SystemConfig<Scalar>& point_system,
                                  std::uint64_t master_seed, std::uint64_t point_tag) {
  if (exp_cfg.reuse_model &&
      exp_cfg.reuse_model->input_dim() == point_system.num_jammers + 1 &&
      exp_cfg.reuse_model->output_dim() == point_system.num_elements - 1)
    return *exp_cfg.reuse_model;
  TrainConfig<Scalar> tc = exp_cfg.train_template;
  tc.system = point_system;
  tc.seed = rng::derive_seed(master_seed, kPointTrainStreamBase + point_tag);
  return train(tc).params;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

// Runs every scheme over every sweep value on a common set of scenes. The
// same `trials` scenes are reused at every point (for the jammer-count sweep
// each point sees a prefix of a master jammer set, same sources), and the
// random baseline replays the same per-trial stream everywhere, so curves
// differ by the scheme and the swept variable only. The learned scheme is
// retrained at each point unless a compatible model is supplied; training
// time is not counted in the per-trial runtime.
template <class Scalar>
SweepResult<Scalar> run_sweep(const SweepSpec<Scalar>& spec,
                              const ExperimentConfig<Scalar>& exp_cfg) {
  spec.validate();
  exp_cfg.base_system.validate();
  exp_cfg.ao.validate();

  Index master_jammers = exp_cfg.base_system.num_jammers;
  if (spec.variable == SweepVariable::kNumJammers)
    for (const Scalar v : spec.values)
      master_jammers = std::max(master_jammers, static_cast<Index>(v));
  rng::Engine scene_engine = rng::make_engine(spec.seed, kSweepSceneStream);
  const std::vector<Scene<Scalar>> master_scenes = sample_scenes<Scalar>(
      static_cast<std::size_t>(spec.trials), master_jammers, scene_engine);

  SweepResult<Scalar> result;
  for (std::size_t p = 0; p < spec.values.size(); ++p) {
    const Scalar value = spec.values[p];
    const SystemConfig<Scalar> sys =
        detail::apply_sweep_value(exp_cfg.base_system, spec.variable, value);
    sys.validate();

    std::vector<Scene<Scalar>> scenes;
    scenes.reserve(master_scenes.size());
    for (const Scene<Scalar>& m : master_scenes)
      scenes.push_back(detail::jammer_prefix(m, sys.num_jammers));

    for (const Scheme scheme : spec.schemes) {
      if (scheme == Scheme::kFpv && !fpv_feasible(sys)) continue;  // absent, not zero

      SweepCell<Scalar> cell;
      cell.variable_value = value;
      cell.scheme = scheme;
      cell.sinrs.reserve(scenes.size());
      cell.runtime_ms.reserve(scenes.size());

      MlpParams<Scalar> model;
      TrainConfig<Scalar> infer_cfg = exp_cfg.train_template;
      infer_cfg.system = sys;
      if (scheme == Scheme::kLearned)
        model = detail::train_for_point(exp_cfg, sys, spec.seed, p);

      for (std::size_t t = 0; t < scenes.size(); ++t) {
        const Scene<Scalar>& scene = scenes[t];
        const auto t0 = std::chrono::steady_clock::now();
        Scalar eta = Scalar(0);
        switch (scheme) {
          case Scheme::kLearned: eta = infer(model, scene, infer_cfg).sinr; break;
          case Scheme::kAo: eta = ao(scene, sys, exp_cfg.ao).sinr; break;
          case Scheme::kFpv: eta = fpv(scene, sys).sinr; break;
          case Scheme::kRpb: {
            rng::Engine trial_engine = rng::make_engine(spec.seed, kRpbTrialStreamBase + t);
            eta = rpb(scene, sys, trial_engine).sinr;
            break;
          }
        }
        cell.runtime_ms.push_back(detail::elapsed_ms(t0));
        cell.sinrs.push_back(eta);
      }
      detail::push_stats(result.rows, cell);
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

template <class Scalar>
void write_sweep_csv(const std::filesystem::path& path, const SweepResult<Scalar>& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path.string());
  out << "variable_value,scheme,mean_sinr_db,std_sinr_db,mean_runtime_ms\n";
  for (const SweepRow<Scalar>& row : result.rows) {
    out << detail::format_double(static_cast<double>(row.variable_value)) << ','
        << scheme_name(row.scheme) << ','
        << detail::format_double(static_cast<double>(row.mean_sinr_db)) << ','
        << detail::format_double(static_cast<double>(row.std_sinr_db)) << ','
        << detail::format_double(row.mean_runtime_ms) << '\n';
  }
  if (!out) throw std::runtime_error("write_sweep_csv: write failed for " + path.string());
}

template <class Scalar>
struct BenchSpec {
  std::vector<Index> elements{8};
  std::vector<Index> jammers{1, 2, 3, 4, 5, 6};
  Index scenes_per_point = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (elements.empty() && jammers.empty())
      throw std::invalid_argument("bench: nothing to measure");
    if (scenes_per_point < 1) throw std::invalid_argument("bench: need at least one scene");
    for (const Index n : elements)
      if (n < 2) throw std::invalid_argument("bench: element counts must be at least 2");
    for (const Index k : jammers)
      if (k < 0) throw std::invalid_argument("bench: jammer counts cannot be negative");
  }
};

template <class Scalar>
struct BenchCell {
  Scheme scheme = Scheme::kLearned;
  Index elements = 0;
  Index jammers = 0;
  std::vector<double> samples_ms;  // per scene; per 100-scene block for fpv and rpb
};

struct BenchRow {
  Scheme scheme = Scheme::kLearned;
  Index elements = 0;
  Index jammers = 0;
  double mean_ms = 0;
  double p95_ms = 0;
};

template <class Scalar>
struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<BenchCell<Scalar>> cells;
};

// Batch size for timing schemes whose single run sits near the clock
// resolution; one sample is the time of this many back-to-back runs.
inline constexpr Index kBenchBlockRuns = 100;

namespace detail {

inline double percentile95(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const std::size_t idx = n == 0 ? 0 : (19 * n + 19) / 20 - 1;  // ceil(0.95 n) - 1
  return samples[std::min(idx, n - 1)];
}

}  // namespace detail

// Wall-clock cost of producing a placement plus beamformer per scheme, over
// a grid of (N, K) points: every requested element count at the base jammer
// count, then the base element count at every requested jammer count. The
// learned scheme is retrained per point outside the timed region.
template <class Scalar>
BenchResult<Scalar> run_bench(const BenchSpec<Scalar>& spec,
                              const ExperimentConfig<Scalar>& exp_cfg) {
  spec.validate();
  exp_cfg.base_system.validate();
  exp_cfg.ao.validate();

  std::vector<std::pair<Index, Index>> points;
  auto add_point = [&points](Index n, Index k) {
    for (const auto& p : points)
      if (p.first == n && p.second == k) return;
    points.emplace_back(n, k);
  };
  for (const Index n : spec.elements) add_point(n, exp_cfg.base_system.num_jammers);
  for (const Index k : spec.jammers) add_point(exp_cfg.base_system.num_elements, k);

  BenchResult<Scalar> result;
  for (std::size_t p = 0; p < points.size(); ++p) {
    SystemConfig<Scalar> sys = exp_cfg.base_system;
    sys.num_elements = points[p].first;
    sys.num_jammers = points[p].second;
    sys.tx_power.clear();  // per-transmitter powers cannot follow a varying K
    sys.validate();

    rng::Engine scene_engine = rng::make_engine(spec.seed, kBenchSceneStreamBase + p);
    const std::vector<Scene<Scalar>> scenes = sample_scenes<Scalar>(
        static_cast<std::size_t>(spec.scenes_per_point), sys.num_jammers, scene_engine);

    TrainConfig<Scalar> infer_cfg = exp_cfg.train_template;
    infer_cfg.system = sys;
    const MlpParams<Scalar> model =
        detail::train_for_point(exp_cfg, sys, spec.seed, 0x8000 + p);

    for (const Scheme scheme : {Scheme::kLearned, Scheme::kAo, Scheme::kFpv, Scheme::kRpb}) {
      if (scheme == Scheme::kFpv && !fpv_feasible(sys)) continue;
      BenchCell<Scalar> cell;
      cell.scheme = scheme;
      cell.elements = sys.num_elements;
      cell.jammers = sys.num_jammers;

      rng::Engine rpb_engine = rng::make_engine(spec.seed, kRpbTrialStreamBase + p);
      auto run_once = [&](const Scene<Scalar>& scene) {
        switch (scheme) {
          case Scheme::kLearned: infer(model, scene, infer_cfg); break;
          case Scheme::kAo: ao(scene, sys, exp_cfg.ao); break;
          case Scheme::kFpv: fpv(scene, sys); break;
          case Scheme::kRpb: rpb(scene, sys, rpb_engine); break;
        }
      };

      run_once(scenes.front());  // warm caches before timing
      if (scheme == Scheme::kLearned || scheme == Scheme::kAo) {
        for (const Scene<Scalar>& scene : scenes) {
          const auto t0 = std::chrono::steady_clock::now();
          run_once(scene);
          cell.samples_ms.push_back(detail::elapsed_ms(t0));
        }
      } else {
        for (const Scene<Scalar>& scene : scenes) {
          const auto t0 = std::chrono::steady_clock::now();
          for (Index r = 0; r < kBenchBlockRuns; ++r) run_once(scene);
          cell.samples_ms.push_back(detail::elapsed_ms(t0));
        }
      }

      BenchRow row;
      row.scheme = scheme;
      row.elements = cell.elements;
      row.jammers = cell.jammers;
      double sum = 0;
      for (const double t : cell.samples_ms) sum += t;
      row.mean_ms = sum / static_cast<double>(cell.samples_ms.size());
      row.p95_ms = detail::percentile95(cell.samples_ms);
      result.rows.push_back(row);
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

template <class Scalar>
void write_bench_csv(const std::filesystem::path& path, const BenchResult<Scalar>& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_bench_csv: cannot open " + path.string());
  out << "scheme,N,K,mean_ms,p95_ms\n";
  for (const BenchRow& row : result.rows) {
    out << scheme_name(row.scheme) << ',' << row.elements << ',' << row.jammers << ','
        << detail::format_double(row.mean_ms) << ',' << detail::format_double(row.p95_ms)
        << '\n';
  }
  if (!out) throw std::runtime_error("write_bench_csv: write failed for " + path.string());
}

}  // namespace movant
