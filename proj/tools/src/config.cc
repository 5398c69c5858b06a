// Copyright 2026 The BSM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bsm/error.h"

namespace bsm::tools {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"array", {"geometry"}},
      {"hrtf",
       {"source", "sample_rate_hz", "dft_size", "grid_theta", "grid_phi", "head_radius_m", "horizontal_count",
        "horizontal_tolerance_deg"}},
      {"design", {"methods", "band_lo_hz", "band_hi_hz", "noise_to_signal", "crossover_hz", "covariance_constraint"}},
      {"magls", {"init_phase_rad", "phase_init", "tol", "max_iter", "relative_tol"}},
      {"imagls",
       {"lambda", "lambda_sweep", "sweep_max_degradation_db", "sweep_max_magnitude_error_db", "erb_step",
        "smoothing_eps", "max_iter", "grad_tol", "memory", "init", "magnitude_weighting", "covariance_constraint"}},
      {"render", {"taps"}},
      {"output", {"directory"}},
  };
  return kSchema;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorCode::kConfig, key + ": expected " + expected + ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto text = trim(value);
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) bad_value(key, value, "a number");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto text = trim(value);
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) bad_value(key, value, "an integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const auto text = trim(value);
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  bad_value(key, value, "true or false");
}

std::string resolve_path(const std::string& value, const std::filesystem::path& base) {
  const std::filesystem::path p(value);
  if (p.is_absolute() || base.empty()) return p.lexically_normal().string();
  return std::filesystem::absolute(base / p).lexically_normal().string();
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_number(values[i]);
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw Error(ErrorCode::kDomain, "cannot format number");
  return std::string(buffer, end);
}

std::vector<double> parse_number_list(const std::string& name, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(name, item));
  if (!text.empty() && text.back() == ',') bad_value(name, text, "a comma-separated list of numbers");
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_directory) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (!body.data().empty()) throw Error(ErrorCode::kConfig, "key '" + section + "' outside any section");
      throw Error(ErrorCode::kConfig, "unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!it->second.contains(key)) throw Error(ErrorCode::kConfig, "unknown key '" + section + "." + key + "'");
      const std::string name = section + "." + key;
      const std::string value = trim(node.data());
      try {
        if (section == "array") {
          c.geometry = value.starts_with("builtin:") ? value : resolve_path(value, base_directory);
        } else if (section == "hrtf") {
          if (key == "source") c.hrtf = value == "synthetic" ? value : resolve_path(value, base_directory);
          else if (key == "sample_rate_hz") c.sample_rate_hz = parse_double(name, value);
          else if (key == "dft_size") c.dft_size = parse_int(name, value);
          else if (key == "grid_theta") c.grid_theta = parse_int(name, value);
          else if (key == "grid_phi") c.grid_phi = parse_int(name, value);
          else if (key == "head_radius_m") c.head_radius_m = parse_double(name, value);
          else if (key == "horizontal_count") c.horizontal_count = parse_int(name, value);
          else if (key == "horizontal_tolerance_deg") c.horizontal_tolerance_deg = parse_double(name, value);
        } else if (section == "design") {
          if (key == "methods") {
            c.methods.clear();
            for (const auto& m : split_list(value)) c.methods.push_back(parse_design_kind(m));
          } else if (key == "band_lo_hz") c.band_lo_hz = parse_double(name, value);
          else if (key == "band_hi_hz") c.band_hi_hz = parse_double(name, value);
          else if (key == "noise_to_signal") c.noise_to_signal = parse_double(name, value);
          else if (key == "crossover_hz") c.crossover_hz = parse_double(name, value);
          else if (key == "covariance_constraint") c.magls_covariance_constraint = parse_bool(name, value);
        } else if (section == "magls") {
          if (key == "init_phase_rad") c.magls.init_phase_rad = parse_double(name, value);
          else if (key == "phase_init") c.magls.phase_init = parse_magls_phase_init(value);
          else if (key == "tol") c.magls.tol = parse_double(name, value);
          else if (key == "max_iter") c.magls.max_iter = parse_int(name, value);
          else if (key == "relative_tol") c.magls.relative_tol = parse_bool(name, value);
        } else if (section == "imagls") {
          if (key == "lambda") c.imagls.lambda = parse_double(name, value);
          else if (key == "lambda_sweep") {
            c.lambda_sweep = parse_number_list(name, value);
          } else if (key == "sweep_max_degradation_db") c.sweep_max_degradation_db = parse_double(name, value);
          else if (key == "sweep_max_magnitude_error_db") c.sweep_max_magnitude_error_db = parse_double(name, value);
          else if (key == "erb_step") c.erb_step = parse_double(name, value);
          else if (key == "smoothing_eps") c.imagls.smoothing_eps = parse_double(name, value);
          else if (key == "max_iter") c.imagls.max_iter = parse_int(name, value);
          else if (key == "grad_tol") c.imagls.grad_tol = parse_double(name, value);
          else if (key == "memory") c.imagls.lbfgs_memory = parse_int(name, value);
          else if (key == "init") c.imagls.init = parse_imagls_init(value);
          else if (key == "magnitude_weighting") c.imagls.magnitude_weighting = parse_magnitude_weighting(value);
          else if (key == "covariance_constraint") c.imagls.apply_covariance_constraint = parse_bool(name, value);
        } else if (section == "render") {
          c.taps = parse_int(name, value);
        } else if (section == "output") {
          c.output_directory = resolve_path(value, base_directory);
        }
      } catch (const Error& e) {
        // Enumerations parsed by the core report their own codes; inside a
        // config every bad value is a configuration error.
        if (e.code() == ErrorCode::kConfig) throw;
        throw Error(ErrorCode::kConfig, name + ": " + e.what());
      }
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path).parent_path());
}

void ExperimentConfig::validate() const {
  const auto require = [](bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::kConfig, message);
  };
  require(geometry.starts_with("builtin:") ? geometry == "builtin:semicircular6" : !geometry.empty(),
          "array.geometry must be builtin:semicircular6 or a file path");
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), "hrtf.sample_rate_hz must be positive");
  require(dft_size >= 4 && dft_size % 2 == 0, "hrtf.dft_size must be even and >= 4");
  require(grid_theta >= 1 && grid_phi >= 1, "hrtf.grid_theta and hrtf.grid_phi must be >= 1");
  require(head_radius_m > 0.0, "hrtf.head_radius_m must be positive");
  require(horizontal_count >= 2, "hrtf.horizontal_count must be >= 2");
  require(horizontal_tolerance_deg >= 0.0, "hrtf.horizontal_tolerance_deg must be >= 0");
  require(!methods.empty(), "design.methods must list at least one method");
  require(band_lo_hz >= 0.0 && band_hi_hz > band_lo_hz, "design band must satisfy 0 <= band_lo_hz < band_hi_hz");
  require(band_hi_hz <= sample_rate_hz / 2.0 + 1e-9, "design.band_hi_hz exceeds the Nyquist frequency");
  require(noise_to_signal >= 0.0 && std::isfinite(noise_to_signal), "design.noise_to_signal must be >= 0");
  require(crossover_hz > 0.0 && crossover_hz < sample_rate_hz / 2.0, "design.crossover_hz must lie in (0, fs/2)");
  require(magls.tol >= 0.0 && magls.max_iter >= 1, "magls.tol must be >= 0 and magls.max_iter >= 1");
  require(erb_step > 0.0, "imagls.erb_step must be positive");
  for (double l : lambda_sweep) require(l >= 0.0 && std::isfinite(l), "imagls.lambda_sweep values must be >= 0");
  require(taps >= 128 && (taps & (taps - 1)) == 0, "render.taps must be a power of two >= 128");
  ImaglsConfig probe = imagls;
  probe.ild_spec.centers_hz = {band_lo_hz};
  probe.ild_spec.band_lo_hz = band_lo_hz;
  probe.ild_spec.band_hi_hz = band_hi_hz;
  probe.ild_spec.horizontal_directions = {Direction::from_degrees(90.0, 0.0)};
  probe.validate();
}

std::string ExperimentConfig::to_ini() const {
  std::ostringstream o;
  std::string method_list;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i > 0) method_list += ", ";
    method_list += design_kind_name(methods[i]);
  }
  const auto flag = [](bool b) { return b ? "true" : "false"; };
  o << "[array]\n"
    << "geometry = " << geometry << "\n\n"
    << "[hrtf]\n"
    << "source = " << hrtf << '\n'
    << "sample_rate_hz = " << format_number(sample_rate_hz) << '\n'
    << "dft_size = " << dft_size << '\n'
    << "grid_theta = " << grid_theta << '\n'
    << "grid_phi = " << grid_phi << '\n'
    << "head_radius_m = " << format_number(head_radius_m) << '\n'
    << "horizontal_count = " << horizontal_count << '\n'
    << "horizontal_tolerance_deg = " << format_number(horizontal_tolerance_deg) << "\n\n"
    << "[design]\n"
    << "methods = " << method_list << '\n'
    << "band_lo_hz = " << format_number(band_lo_hz) << '\n'
    << "band_hi_hz = " << format_number(band_hi_hz) << '\n'
    << "noise_to_signal = " << format_number(noise_to_signal) << '\n'
    << "crossover_hz = " << format_number(crossover_hz) << '\n'
    << "covariance_constraint = " << flag(magls_covariance_constraint) << "\n\n"
    << "[magls]\n"
    << "init_phase_rad = " << format_number(magls.init_phase_rad) << '\n'
    << "phase_init = " << magls_phase_init_name(magls.phase_init) << '\n'
    << "tol = " << format_number(magls.tol) << '\n'
    << "max_iter = " << magls.max_iter << '\n'
    << "relative_tol = " << flag(magls.relative_tol) << "\n\n"
    << "[imagls]\n"
    << "lambda = " << format_number(imagls.lambda) << '\n'
    << "lambda_sweep = " << join_numbers(lambda_sweep) << '\n'
    << "sweep_max_degradation_db = " << format_number(sweep_max_degradation_db) << '\n'
    << "sweep_max_magnitude_error_db = " << format_number(sweep_max_magnitude_error_db) << '\n'
    << "erb_step = " << format_number(erb_step) << '\n'
    << "smoothing_eps = " << format_number(imagls.smoothing_eps) << '\n'
    << "max_iter = " << imagls.max_iter << '\n'
    << "grad_tol = " << format_number(imagls.grad_tol) << '\n'
    << "memory = " << imagls.lbfgs_memory << '\n'
    << "init = " << imagls_init_name(imagls.init) << '\n'
    << "magnitude_weighting = " << magnitude_weighting_name(imagls.magnitude_weighting) << '\n'
    << "covariance_constraint = " << flag(imagls.apply_covariance_constraint) << "\n\n"
    << "[render]\n"
    << "taps = " << taps << '\n';
  if (!output_directory.empty()) o << "\n[output]\ndirectory = " << output_directory << '\n';
  return o.str();
}

nlohmann::json ExperimentConfig::to_json() const {
  pt::ptree tree;
  std::istringstream in(to_ini());
  pt::read_ini(in, tree);
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [section, body] : tree) {
    for (const auto& [key, node] : body) out[section][key] = node.data();
  }
  return out;
}

ArrayGeometry resolve_geometry(const ExperimentConfig& config) {
  if (config.geometry == "builtin:semicircular6") return ArrayGeometry::semicircular6();
  return load_geometry(config.geometry);
}

}  // namespace bsm::tools
