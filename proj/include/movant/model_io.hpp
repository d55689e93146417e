#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "movant/neural.hpp"
#include "movant/types.hpp"

namespace movant {

namespace detail {

inline std::string activation_name(Activation act) {
  switch (act) {
    case Activation::kReLU: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kIdentity: return "identity";
  }
  throw std::logic_error("unknown activation");
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kReLU;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "identity") return Activation::kIdentity;
  throw std::runtime_error("model file: unknown activation '" + name + "'");
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

// Writes the network as versioned JSON with sorted keys, so saving the same
// parameters twice produces identical bytes. Weights are nested arrays in
// row-major order.
template <class Scalar>
void save_model(const MlpParams<Scalar>& params, const std::filesystem::path& path) {
  check_layer_specs(params.specs);
  nlohmann::json doc;
  doc["version"] = kModelFormatVersion;
  doc["seed"] = params.seed;
  doc["layer_specs"] = nlohmann::json::array();
  doc["weights"] = nlohmann::json::array();
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const LayerSpec& s = params.specs[l];
    doc["layer_specs"].push_back({{"activation", detail::activation_name(s.activation)},
                                  {"input_dim", s.input_dim},
                                  {"output_dim", s.output_dim}});
    if (!params.weights[l].allFinite() || !params.biases[l].allFinite())
      throw std::runtime_error("save_model: layer " + std::to_string(l + 1) +
                               " holds non-finite parameters");
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < s.output_dim; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Index c = 0; c < s.input_dim; ++c)
        row.push_back(static_cast<double>(params.weights[l](r, c)));
      rows.push_back(std::move(row));
    }
    nlohmann::json bias = nlohmann::json::array();
    for (Index r = 0; r < s.output_dim; ++r)
      bias.push_back(static_cast<double>(params.biases[l][r]));
    doc["weights"].push_back({{"bias", std::move(bias)}, {"weight", std::move(rows)}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("save_model: write failed for " + path.string());
}

template <class Scalar = double>
MlpParams<Scalar> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_model: " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (!doc.contains("version") || !doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kModelFormatVersion)
      throw std::runtime_error("unsupported model format version");
    MlpParams<Scalar> params;
    params.seed = doc.at("seed").get<std::uint64_t>();
    const auto& spec_list = doc.at("layer_specs");
    const auto& weight_list = doc.at("weights");
    if (spec_list.size() != weight_list.size() || spec_list.empty())
      throw std::runtime_error("layer_specs and weights disagree");
    for (std::size_t l = 0; l < spec_list.size(); ++l) {
      LayerSpec s;
      s.input_dim = spec_list[l].at("input_dim").get<Index>();
      s.output_dim = spec_list[l].at("output_dim").get<Index>();
      s.activation = detail::activation_from_name(spec_list[l].at("activation").get<std::string>());
      params.specs.push_back(s);
      const auto& rows = weight_list[l].at("weight");
      const auto& bias = weight_list[l].at("bias");
      if (static_cast<Index>(rows.size()) != s.output_dim ||
          static_cast<Index>(bias.size()) != s.output_dim)
        throw std::runtime_error("layer " + std::to_string(l + 1) + " dimensions disagree");
      MatX<Scalar> w(s.output_dim, s.input_dim);
      for (Index r = 0; r < s.output_dim; ++r) {
        if (static_cast<Index>(rows[r].size()) != s.input_dim)
          throw std::runtime_error("layer " + std::to_string(l + 1) + " dimensions disagree");
        for (Index c = 0; c < s.input_dim; ++c)
          w(r, c) = Scalar(rows[r][c].get<double>());
      }
      VecX<Scalar> b(s.output_dim);
      for (Index r = 0; r < s.output_dim; ++r) b[r] = Scalar(bias[r].get<double>());
      params.weights.push_back(std::move(w));
      params.biases.push_back(std::move(b));
    }
    check_layer_specs(params.specs);
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_model: " + path.string() + " is malformed: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("load_model: " + path.string() + " is malformed: " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("load_model: " + path.string() + ": " + e.what());
  }
}

}  // namespace movant
