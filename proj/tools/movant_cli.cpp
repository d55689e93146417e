// Command-line front end: dataset generation, training, inference, baseline
// evaluation, performance sweeps and runtime benchmarks for the movable
// antenna jamming-mitigation simulator.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure (divergence,
// solver breakdown, I/O).

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "movant/array_model.hpp"
#include "movant/baselines.hpp"
#include "movant/experiment.hpp"
#include "movant/io.hpp"
#include "movant/model_io.hpp"
#include "movant/training.hpp"

namespace {

using Scalar = double;

std::string format_positions(const movant::ArrayLayout<Scalar>& layout) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < layout.size(); ++i) {
    if (i) s += ", ";
    s += movant::detail::format_double(layout.positions[i]);
  }
  return s + "]";
}

// Shared geometry/noise flags. Every subcommand that touches the physical
// model exposes the same names, so one TOML config can drive them all.
void add_system_flags(CLI::App* cmd, movant::SystemConfig<Scalar>& sys,
                      bool with_elements = true, bool with_jammers = true) {
  if (with_elements)
    cmd->add_option("--elements", sys.num_elements, "Number of array elements")
        ->capture_default_str();
  if (with_jammers)
    cmd->add_option("--jammers", sys.num_jammers, "Number of jammers")
        ->capture_default_str();
  cmd->add_option("--region", sys.region_size, "Placement region length, wavelengths")
      ->capture_default_str();
  cmd->add_option("--min-spacing", sys.min_spacing, "Minimum element spacing, wavelengths")
      ->capture_default_str();
  cmd->add_option("--noise", sys.noise_power, "Noise power")->capture_default_str();
  cmd->add_option("--wavelength", sys.wavelength, "Carrier wavelength label for outputs")
      ->capture_default_str();
}

void add_feature_flag(CLI::App* cmd, movant::Featurization& mode) {
  static const std::map<std::string, movant::Featurization> names{
      {"angle", movant::Featurization::kNormalizedAngle},
      {"cosine", movant::Featurization::kCosine}};
  cmd->add_option("--features", mode, "Network input encoding of the angles")
      ->transform(CLI::CheckedTransformer(names, CLI::ignore_case))
      ->default_str("angle");
}

void add_ao_flags(CLI::App* cmd, movant::AoConfig<Scalar>& ao) {
  cmd->add_option("--ao-grid", ao.grid_points, "Grid points per coordinate update")
      ->capture_default_str();
  cmd->add_option("--ao-sweeps", ao.max_sweeps, "Maximum coordinate sweeps")
      ->capture_default_str();
  cmd->add_option("--ao-tol", ao.rel_tolerance, "Relative sweep improvement to keep going")
      ->capture_default_str();
}

// Scenes either from --scenes CSV or inline from --theta0/--thetas.
struct SceneInput {
  std::string file;
  Scalar theta0 = 1.5707963267948966;  // broadside
  std::vector<Scalar> thetas;
  bool theta0_given = false;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--scenes", file, "CSV of scenes (theta0,theta1,...)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--theta0", theta0, "Source angle, radians");
    cmd->add_option("--thetas", thetas, "Jammer angles, radians, comma separated")
        ->delimiter(',');
  }

  std::vector<movant::Scene<Scalar>> load(const CLI::App* cmd) const {
    if (!file.empty()) {
      if (cmd->count("--theta0") || cmd->count("--thetas"))
        throw std::invalid_argument("--scenes excludes --theta0/--thetas");
      auto scenes = movant::read_scenes_csv<Scalar>(file);
      if (scenes.empty()) throw std::runtime_error("no scenes in " + file);
      return scenes;
    }
    movant::Scene<Scalar> s;
    s.source_angle = theta0;
    s.jammer_angles = Eigen::Map<const movant::VecX<Scalar>>(
        thetas.data(), static_cast<Eigen::Index>(thetas.size()));
    s.validate();
    return {s};
  }
};

void write_results_csv(const std::string& path,
                       const std::vector<movant::ArrayLayout<Scalar>>& layouts,
                       const std::vector<Scalar>& sinrs_db) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "scene,sinr_db";
  for (Eigen::Index i = 0; i < layouts.front().size(); ++i) out << ",x" << (i + 1);
  out << '\n';
  for (std::size_t s = 0; s < layouts.size(); ++s) {
    out << (s + 1) << ',' << movant::detail::format_double(sinrs_db[s]);
    for (Eigen::Index i = 0; i < layouts[s].size(); ++i)
      out << ',' << movant::detail::format_double(layouts[s].positions[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

int run(int argc, char** argv) {
  CLI::App app{"Movable antenna array simulator: learned placement against "
               "alternating-optimization, fixed and random baselines"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file mirroring the flags; command line wins");

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Master seed for every random stream")
      ->capture_default_str();

  // ---- gen-data ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "Sample training scenes to CSV");
  Eigen::Index gen_jammers = 3;
  std::size_t gen_size = 100000;
  std::string gen_out;
  std::optional<Scalar> gen_theta0;
  gen->add_option("--jammers", gen_jammers, "Number of jammers per scene")
      ->capture_default_str();
  gen->add_option("--size", gen_size, "Number of scenes")->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV path")->required();
  gen->add_option("--fixed-theta0", gen_theta0,
                  "Fix the source angle (radians); jammers stay random");

  // ---- train -------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "Train the positioning network");
  movant::TrainConfig<Scalar> tc;
  std::string tr_data, tr_model = "model.json", tr_history = "history.csv";
  std::size_t tr_holdout = 1000;
  std::vector<Eigen::Index> tr_hidden{128, 128};
  tr->add_option("--data", tr_data, "Training scenes CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", tr_model, "Model output path")->capture_default_str();
  tr->add_option("--history", tr_history, "Per-epoch history CSV path")->capture_default_str();
  add_system_flags(tr, tc.system, true, false);  // jammer count comes from the data
  tr->add_option("--epochs", tc.epochs, "Training epochs")->capture_default_str();
  tr->add_option("--batch", tc.batch_size, "Batch size")->capture_default_str();
  tr->add_option("--lr", tc.learning_rate, "Learning rate")->capture_default_str();
  tr->add_option("--hidden", tr_hidden, "Hidden layer widths, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  tr->add_option("--momentum", tc.momentum, "Momentum coefficient, 0 disables")
      ->capture_default_str();
  tr->add_option("--clip", tc.grad_clip_norm, "Gradient clipping norm")->capture_default_str();
  tr->add_option("--threads", tc.threads, "Worker threads per batch")->capture_default_str();
  tr->add_option("--holdout", tr_holdout, "Held-out scenes evaluated after training")
      ->capture_default_str();
  add_feature_flag(tr, tc.features);

  // ---- infer -------------------------------------------------------------
  auto* inf = app.add_subcommand("infer", "Place antennas with a trained model");
  std::string inf_model, inf_out;
  movant::SystemConfig<Scalar> inf_sys;
  movant::Featurization inf_features = movant::Featurization::kNormalizedAngle;
  SceneInput inf_scene;
  inf->add_option("--model", inf_model, "Trained model JSON")->required()->check(CLI::ExistingFile);
  add_system_flags(inf, inf_sys, false, false);  // N and K come from the model
  inf_scene.add_flags(inf);
  add_feature_flag(inf, inf_features);
  inf->add_option("--out", inf_out, "Per-scene results CSV");

  // ---- baseline ----------------------------------------------------------
  auto* base = app.add_subcommand("baseline", "Run a non-learned placement scheme");
  std::string base_scheme, base_out;
  movant::SystemConfig<Scalar> base_sys;
  movant::AoConfig<Scalar> base_ao;
  SceneInput base_scene;
  base->add_option("--scheme", base_scheme, "One of ao, fpv, rpb")
      ->required()
      ->check(CLI::IsMember({"ao", "fpv", "rpb"}));
  add_system_flags(base, base_sys, true, false);
  base_scene.add_flags(base);
  add_ao_flags(base, base_ao);
  base->add_option("--out", base_out, "Per-scene results CSV");

  // ---- sweep -------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "Mean SINR of every scheme across a variable");
  movant::SweepSpec<Scalar> sweep_spec;
  movant::SystemConfig<Scalar> sw_sys;
  movant::AoConfig<Scalar> sw_ao;
  std::string sw_variable = "elements", sw_out, sw_model;
  std::vector<std::string> sw_schemes{"learned", "ao", "fpv", "rpb"};
  std::size_t sw_train_size = 10000, sw_train_epochs = 10;
  movant::TrainConfig<Scalar> sw_train;
  sw->add_option("--variable", sw_variable, "Swept variable: elements, region or jammers")
      ->required()
      ->check(CLI::IsMember({"elements", "region", "jammers"}));
  sw->add_option("--values", sweep_spec.values, "Values of the swept variable")
      ->required()
      ->delimiter(',');
  sw->add_option("--trials", sweep_spec.trials, "Scenes per point")->capture_default_str();
  sw->add_option("--schemes", sw_schemes, "Schemes to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"learned", "ao", "fpv", "rpb"}))
      ->capture_default_str();
  sw->add_option("--out", sw_out, "Output CSV path")->required();
  add_system_flags(sw, sw_sys);
  add_ao_flags(sw, sw_ao);
  sw->add_option("--model", sw_model, "Reuse this model where its dimensions fit")
      ->check(CLI::ExistingFile);
  sw->add_option("--train-size", sw_train_size, "Scenes for per-point retraining")
      ->capture_default_str();
  sw->add_option("--train-epochs", sw_train_epochs, "Epochs for per-point retraining")
      ->capture_default_str();
  sw->add_option("--lr", sw_train.learning_rate, "Retraining learning rate")
      ->capture_default_str();
  sw->add_option("--hidden", sw_train.hidden_dims, "Retraining hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  add_feature_flag(sw, sw_train.features);

  // ---- bench-runtime -----------------------------------------------------
  auto* bench = app.add_subcommand("bench-runtime", "Wall-clock cost per scheme");
  movant::BenchSpec<Scalar> bench_spec;
  movant::SystemConfig<Scalar> bench_sys;
  movant::AoConfig<Scalar> bench_ao;
  std::string bench_out, bench_model;
  std::size_t bench_train_size = 10000, bench_train_epochs = 10;
  movant::TrainConfig<Scalar> bench_train;
  bench->add_option("--elements", bench_spec.elements, "Element counts to time")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--jammers", bench_spec.jammers, "Jammer counts to time")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--count", bench_spec.scenes_per_point, "Scenes per point")
      ->capture_default_str();
  bench->add_option("--out", bench_out, "Output CSV path")->required();
  add_system_flags(bench, bench_sys, false, false);  // the lists above own N and K
  add_ao_flags(bench, bench_ao);
  bench->add_option("--model", bench_model, "Reuse this model where its dimensions fit")
      ->check(CLI::ExistingFile);
  bench->add_option("--train-size", bench_train_size, "Scenes for per-point retraining")
      ->capture_default_str();
  bench->add_option("--train-epochs", bench_train_epochs, "Epochs for per-point retraining")
      ->capture_default_str();
  add_feature_flag(bench, bench_train.features);

  // Flags given after a subcommand may still match the top-level app.
  for (CLI::App* sub : {gen, tr, inf, base, sw, bench}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 1;
  }

  if (gen->parsed()) {
    movant::rng::Engine engine = movant::rng::make_engine(seed, movant::kDatasetStream);
    const auto scenes =
        movant::sample_scenes<Scalar>(gen_size, gen_jammers, engine, gen_theta0);
    movant::write_scenes_csv(gen_out, scenes, gen_jammers);
    std::cout << "wrote " << scenes.size() << " scenes to " << gen_out << '\n';
    return 0;
  }

  if (tr->parsed()) {
    const auto dataset = movant::read_scenes_csv<Scalar>(tr_data);
    if (dataset.empty()) throw std::runtime_error("dataset " + tr_data + " holds no scenes");
    tc.system.num_jammers = dataset.front().num_jammers();
    tc.dataset_size = dataset.size();
    tc.seed = seed;
    tc.hidden_dims = tr_hidden;
    movant::TrainResult<Scalar> result;
    try {
      result = movant::train(tc, dataset);
    } catch (const movant::TrainingError<Scalar>& e) {
      movant::write_history_csv(tr_history, e.history());
      std::cerr << "partial history (" << e.history().size() << " epochs) saved to "
                << tr_history << '\n';
      throw;
    }
    movant::write_history_csv(tr_history, result.history);
    movant::save_model(result.params, tr_model);
    std::cout << "model saved to " << tr_model << ", history to " << tr_history << '\n';
    if (tr_holdout > 0) {
      movant::rng::Engine engine = movant::rng::make_engine(seed, movant::kHoldoutStream);
      const auto holdout = movant::sample_scenes<Scalar>(tr_holdout, tc.system.num_jammers, engine);
      Scalar db_sum = 0;
      for (const auto& scene : holdout)
        db_sum += Scalar(10) * std::log10(movant::infer(result.params, scene, tc).sinr);
      std::cout << "held-out mean SINR over " << tr_holdout << " scenes: "
                << movant::detail::format_double(db_sum / Scalar(tr_holdout)) << " dB\n";
    }
    return 0;
  }

  if (inf->parsed()) {
    const auto params = movant::load_model<Scalar>(inf_model);
    movant::TrainConfig<Scalar> icfg;
    icfg.system = inf_sys;
    icfg.system.num_elements = params.output_dim() + 1;
    icfg.system.num_jammers = params.input_dim() - 1;
    icfg.features = inf_features;
    const auto scenes = inf_scene.load(inf);
    std::vector<movant::ArrayLayout<Scalar>> layouts;
    std::vector<Scalar> dbs;
    for (const auto& scene : scenes) {
      const auto res = movant::infer(params, scene, icfg);
      layouts.push_back(res.layout);
      dbs.push_back(Scalar(10) * std::log10(res.sinr));
    }
    if (!inf_out.empty()) write_results_csv(inf_out, layouts, dbs);
    if (scenes.size() == 1) {
      std::cout << "positions (wavelengths): " << format_positions(layouts[0]) << '\n'
                << "sinr: " << movant::detail::format_double(dbs[0]) << " dB\n";
    } else {
      Scalar mean = 0;
      for (const Scalar db : dbs) mean += db;
      std::cout << scenes.size() << " scenes, mean sinr "
                << movant::detail::format_double(mean / Scalar(scenes.size())) << " dB\n";
    }
    return 0;
  }

  if (base->parsed()) {
    const auto scenes = base_scene.load(base);
    base_sys.num_jammers = scenes.front().num_jammers();
    std::vector<movant::ArrayLayout<Scalar>> layouts;
    std::vector<Scalar> dbs;
    movant::rng::Engine rpb_engine =
        movant::rng::make_engine(seed, movant::kRpbTrialStreamBase);
    for (const auto& scene : scenes) {
      if (scene.num_jammers() != base_sys.num_jammers)
        throw std::runtime_error("scenes disagree on the jammer count");
      Scalar eta = 0;
      if (base_scheme == "ao") {
        const auto res = movant::ao(scene, base_sys, base_ao);
        layouts.push_back(res.layout);
        eta = res.sinr;
      } else if (base_scheme == "fpv") {
        const auto res = movant::fpv(scene, base_sys);
        layouts.push_back(res.layout);
        eta = res.sinr;
      } else {
        const auto res = movant::rpb(scene, base_sys, rpb_engine);
        layouts.push_back(res.layout);
        eta = res.sinr;
      }
      dbs.push_back(Scalar(10) * std::log10(eta));
    }
    if (!base_out.empty()) write_results_csv(base_out, layouts, dbs);
    if (scenes.size() == 1) {
      std::cout << base_scheme << " positions (wavelengths): " << format_positions(layouts[0])
                << '\n'
                << "sinr: " << movant::detail::format_double(dbs[0]) << " dB\n";
    } else {
      Scalar mean = 0;
      for (const Scalar db : dbs) mean += db;
      std::cout << base_scheme << ": " << scenes.size() << " scenes, mean sinr "
                << movant::detail::format_double(mean / Scalar(scenes.size())) << " dB\n";
    }
    return 0;
  }

  if (sw->parsed()) {
    sweep_spec.variable = movant::sweep_variable_from_name(sw_variable);
    sweep_spec.seed = seed;
    sweep_spec.schemes.clear();
    for (const std::string& s : sw_schemes)
      sweep_spec.schemes.push_back(movant::scheme_from_name(s));
    movant::ExperimentConfig<Scalar> exp_cfg;
    exp_cfg.base_system = sw_sys;
    exp_cfg.ao = sw_ao;
    sw_train.system = sw_sys;
    sw_train.dataset_size = sw_train_size;
    sw_train.epochs = sw_train_epochs;
    exp_cfg.train_template = sw_train;
    movant::MlpParams<Scalar> reuse;
    if (!sw_model.empty()) {
      reuse = movant::load_model<Scalar>(sw_model);
      exp_cfg.reuse_model = &reuse;
    }
    const auto result = movant::run_sweep(sweep_spec, exp_cfg);
    movant::write_sweep_csv(sw_out, result);
    std::cout << "wrote " << result.rows.size() << " rows to " << sw_out << '\n';
    return 0;
  }

  if (bench->parsed()) {
    bench_spec.seed = seed;
    movant::ExperimentConfig<Scalar> exp_cfg;
    exp_cfg.base_system = bench_sys;
    exp_cfg.ao = bench_ao;
    bench_train.system = bench_sys;
    bench_train.dataset_size = bench_train_size;
    bench_train.epochs = bench_train_epochs;
    exp_cfg.train_template = bench_train;
    movant::MlpParams<Scalar> reuse;
    if (!bench_model.empty()) {
      reuse = movant::load_model<Scalar>(bench_model);
      exp_cfg.reuse_model = &reuse;
    }
    const auto result = movant::run_bench(bench_spec, exp_cfg);
    movant::write_bench_csv(bench_out, result);
    std::cout << "wrote " << result.rows.size() << " rows to " << bench_out << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError&) {
    return 1;  // CLI11_PARSE handles printing; only rethrown errors land here
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
