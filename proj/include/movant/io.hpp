#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "movant/types.hpp"

namespace movant {

namespace detail {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& token, const std::string& where) {
  double value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::runtime_error(where + ": cannot parse number '" + token + "'");
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

// Writes scenes as CSV with header theta0,theta1,...,thetaK (radians).
// `num_jammers` fixes the column count; every scene must match it.
template <class Scalar>
void write_scenes_csv(const std::filesystem::path& path,
                      const std::vector<Scene<Scalar>>& scenes, Index num_jammers) {
  if (num_jammers < 0) throw std::invalid_argument("write_scenes_csv: negative jammer count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_scenes_csv: cannot open " + path.string());
  out << "theta0";
  for (Index k = 1; k <= num_jammers; ++k) out << ",theta" << k;
  out << '\n';
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene<Scalar>& s = scenes[i];
    if (s.num_jammers() != num_jammers)
      throw std::invalid_argument("write_scenes_csv: scene " + std::to_string(i + 1) +
                                  " has " + std::to_string(s.num_jammers()) +
                                  " jammers, expected " + std::to_string(num_jammers));
    out << detail::format_double(static_cast<double>(s.source_angle));
    for (Index k = 0; k < num_jammers; ++k)
      out << ',' << detail::format_double(static_cast<double>(s.jammer_angles[k]));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_scenes_csv: write failed for " + path.string());
}

template <class Scalar = double>
std::vector<Scene<Scalar>> read_scenes_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_scenes_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_scenes_csv: " + path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "theta0")
    throw std::runtime_error("read_scenes_csv: " + path.string() +
                             ": header must start with theta0");
  for (std::size_t k = 1; k < header.size(); ++k)
    if (header[k] != "theta" + std::to_string(k))
      throw std::runtime_error("read_scenes_csv: " + path.string() +
                               ": unexpected header column '" + header[k] + "'");
  const Index num_jammers = static_cast<Index>(header.size()) - 1;

  std::vector<Scene<Scalar>> scenes;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + " row " + std::to_string(row);
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (static_cast<Index>(fields.size()) != num_jammers + 1)
      throw std::runtime_error(where + ": expected " + std::to_string(num_jammers + 1) +
                               " columns, got " + std::to_string(fields.size()));
    Scene<Scalar> s;
    s.source_angle = Scalar(detail::parse_double(fields[0], where));
    s.jammer_angles.resize(num_jammers);
    for (Index k = 0; k < num_jammers; ++k)
      s.jammer_angles[k] = Scalar(detail::parse_double(fields[k + 1], where));
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    scenes.push_back(std::move(s));
  }
  return scenes;
}

}  // namespace movant
