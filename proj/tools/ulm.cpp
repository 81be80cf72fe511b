// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The ulmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ulm: batch front-end for the ultrasound localization microscopy pipeline.
//
//   ulm defaults                      print the default configuration
//   ulm simulate [-c CFG] OUT.ulmf    simulate an acquisition
//   ulm run [-c CFG] [-o DIR] IN.ulmf beamform, localize, track, render, score
//   ulm evaluate [-c CFG] MAP.f32     score an external map
//   ulm inspect IN.ulmf               print a container header
//
// Errors print a single "error: <kind>: <message>" line and exit non-zero.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ulm/config.hpp"
#include "ulm/io.hpp"
#include "ulm/metrics.hpp"
#include "ulm/pipeline.hpp"

namespace {

constexpr int kExitInvalid = 3;
constexpr int kExitIo = 4;

ulm::PipelineConfig resolve_config(const std::string& path) {
  ulm::PipelineConfig config = path.empty() ? ulm::PipelineConfig::defaults() : ulm::load_config(path);
  config.validate();
  return config;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
  const auto config = resolve_config(config_path);
  const auto frames = ulm::simulate_acquisition(config);
  ulm::write_container(out_path, frames);
  const auto bytes = std::filesystem::file_size(out_path);
  std::cout << "frames=" << frames.size() << " bubbles_per_frame=" << config.phantom.bubbles_per_frame
            << " samples=" << frames.front().n_samples() << " channels=" << frames.front().n_channels()
            << " bytes=" << bytes << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& in_path, const std::string& out_override) {
  auto config = resolve_config(config_path);
  if (!out_override.empty()) config.output_dir = out_override;
  const auto t_start = std::chrono::steady_clock::now();
  const auto frames = ulm::read_container(in_path);
  if (!(frames.front().probe == config.probe))
    throw std::invalid_argument("container probe settings differ from the configuration");
  const auto t_read = std::chrono::steady_clock::now();
  const auto result = ulm::run_pipeline(config, frames);
  const auto t_run = std::chrono::steady_clock::now();
  ulm::write_outputs(result, config, config.output_dir);

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << ulm::metrics_csv_header() << "\n";
  for (const auto& c : result.combinations) std::cout << ulm::metrics_csv_row(c.report) << "\n";

  // Wall-clock data stays in run.log so the rest of the tree is reproducible.
  const auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
  std::ofstream log((std::filesystem::path(config.output_dir) / "run.log").string());
  log << "input=" << in_path << "\nframes=" << frames.size() << "\nread_s=" << secs(t_start, t_read)
      << "\npipeline_s=" << secs(t_read, t_run) << "\n";
  for (const auto& w : result.warnings) log << "warning=" << w << "\n";
  return 0;
}

ulm::Region parse_region_arg(const std::string& text) {
  ulm::Region r;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf", &r.x_min, &r.x_max, &r.z_min, &r.z_max) != 4)
    throw std::invalid_argument("--region expects x_min,x_max,z_min,z_max in meters");
  return r;
}

int cmd_evaluate(const std::string& config_path, const std::string& map_path, const std::string& region_text,
                 double lambda, const std::string& mode, const std::string& label) {
  auto config = resolve_config(config_path);
  if (!region_text.empty()) config.metrics.region = parse_region_arg(region_text);
  if (!mode.empty()) {
    if (mode == "masked") config.metrics.contrast_mode = ulm::ContrastMode::masked;
    else if (mode == "full") config.metrics.contrast_mode = ulm::ContrastMode::full;
    else throw std::invalid_argument("--mode is masked or full");
  }
  if (!(lambda > 0.0)) lambda = config.wavelength();

  const auto raster = ulm::read_raster(map_path);
  if (config.metrics.region) {
    const ulm::Region& r = *config.metrics.region;
    const double x_lo = raster.grid.x0 - 0.5 * raster.grid.dx;
    const double x_hi = raster.grid.x(raster.grid.nx - 1) + 0.5 * raster.grid.dx;
    const double z_lo = raster.grid.z0 - 0.5 * raster.grid.dz;
    const double z_hi = raster.grid.z(raster.grid.nz - 1) + 0.5 * raster.grid.dz;
    if (r.x_min < x_lo || r.x_max > x_hi || r.z_min < z_lo || r.z_max > z_hi)
      throw std::invalid_argument("region outside raster bounds");
  }
  std::vector<std::string> warnings;
  const auto report = ulm::evaluate_map(raster.values, raster.grid, config.metrics, lambda, "-", label, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << ulm::metrics_csv_header() << "\n" << ulm::metrics_csv_row(report) << "\n";
  return 0;
}

int cmd_inspect(const std::string& path) {
  const auto h = ulm::read_container_header(path);
  std::cout << "version=" << h.version << "\nn_frames=" << h.n_frames << "\nn_samples=" << h.n_samples
            << "\nn_channels=" << h.n_channels << "\npitch=" << ulm::format_double(h.probe.pitch)
            << "\nfc=" << ulm::format_double(h.probe.fc) << "\nfs=" << ulm::format_double(h.probe.fs)
            << "\nc=" << ulm::format_double(h.probe.c) << "\nframe_rate=" << ulm::format_double(h.probe.frame_rate)
            << "\nt0=" << ulm::format_double(h.t0) << "\npayload_bytes=" << h.payload_bytes() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultrasound localization microscopy batch pipeline"};
  app.require_subcommand(1);

  std::string config_path, in_path, out_path, map_path, region, mode, label = "external";
  double lambda = 0.0;

  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");

  auto* simulate = app.add_subcommand("simulate", "Simulate an RF acquisition of the configured phantom");
  simulate->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  simulate->add_option("output", out_path, "Output container (.ulmf)")->required();

  auto* run = app.add_subcommand("run", "Run the full pipeline on a container");
  run->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_path, "Output directory (overrides run.output_dir)");
  run->add_option("input", in_path, "Input container (.ulmf)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a raster with both quality metrics");
  evaluate->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  evaluate->add_option("--region", region, "Canal region x_min,x_max,z_min,z_max in meters");
  evaluate->add_option("--lambda", lambda, "Wavelength in meters (default: from config)");
  evaluate->add_option("--mode", mode, "Local contrast windows: masked or full");
  evaluate->add_option("--label", label, "Label written in the localizer column");
  evaluate->add_option("map", map_path, "Raster (.f32 with .txt sidecar)")->required();

  auto* inspect = app.add_subcommand("inspect", "Print a container header");
  inspect->add_option("input", in_path, "Input container (.ulmf)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*defaults) {
      std::cout << ulm::serialize_config(ulm::PipelineConfig::defaults());
      return 0;
    }
    if (*simulate) return cmd_simulate(config_path, out_path);
    if (*run) return cmd_run(config_path, in_path, out_path);
    if (*evaluate) return cmd_evaluate(config_path, map_path, region, lambda, mode, label);
    if (*inspect) return cmd_inspect(in_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
