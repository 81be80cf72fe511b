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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ulm/beamform.hpp"
#include "ulm/localize.hpp"
#include "ulm/metrics.hpp"
#include "ulm/rfsim.hpp"
#include "ulm/track.hpp"

namespace ulm {

struct GridSettings {
  double x_min = -1.6e-3;
  double x_max = 2.4e-3;
  double z_min = 8.5e-3;
  double z_max = 11.5e-3;
  double pitch_lambda = 1.0;  // localization pixel pitch in wavelengths
  std::size_t axial_oversample = 16;

  bool operator==(const GridSettings&) const = default;
};

struct ClutterSettings {
  std::size_t cut_low = 1;
  std::size_t cut_high = 0;
  bool before_localization = false;

  bool operator==(const ClutterSettings&) const = default;
};

struct MetricSettings {
  ContrastMode contrast_mode = ContrastMode::masked;
  std::optional<Region> region;
  double map_pitch_lambda = 0.1;

  bool operator==(const MetricSettings&) const = default;
};

struct PipelineConfig {
  Probe probe;
  PhantomSpec phantom;
  GridSettings grid;
  Apodization apodization;
  BandpassSpec bandpass;
  DetectorParams detector;
  LocalizerOptions localizer;
  TrackerParams tracker;  // max_link_distance == 0 selects 2x the fastest per-frame step
  ClutterSettings clutter;
  MetricSettings metrics;
  std::vector<Beamformer> beamformers = {Beamformer::DAS, Beamformer::FDMAS};
  std::vector<Localizer> localizers = {kAllLocalizers.begin(), kAllLocalizers.end()};
  std::string output_dir = "ulm_out";
  double bmode_dynamic_range_db = 60.0;

  /// Defaults with the bundled phantom and its twin-canal scoring region.
  static PipelineConfig defaults();

  double wavelength() const { return probe.wavelength(); }
  double max_link_distance() const;

  /// Throws std::invalid_argument naming the offending setting.
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

/// Parses `section.key = value` lines; '#' starts a comment. Keys not
/// present keep their defaults. Canals, when given, replace the bundled
/// phantom.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::string& path);

/// Every setting, one per line, in a form parse_config reads back exactly.
std::string serialize_config(const PipelineConfig& config);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace ulm
