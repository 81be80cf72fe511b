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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulm/beamform.hpp"
#include "ulm/clutter.hpp"
#include "ulm/config.hpp"
#include "ulm/localize.hpp"
#include "ulm/metrics.hpp"
#include "ulm/track.hpp"

namespace ulm {

/// Pixel grid used for detection and localization (lambda pitch by default).
BeamGrid localization_grid(const PipelineConfig& config);
/// Localization grid with its axial pitch refined for RF beamforming.
BeamGrid beamforming_grid(const PipelineConfig& config);
/// Super-resolved map grid over the same field of view.
BeamGrid map_grid(const PipelineConfig& config);

std::vector<RfFrame> simulate_acquisition(const PipelineConfig& config);

/// rf_grid image on the beamforming grid.
BfImage beamform_frame(const RfFrame& frame, const PipelineConfig& config, Beamformer beamformer);

struct BeamformerProducts {
  Beamformer beamformer = Beamformer::DAS;
  std::vector<BfImage> envelopes;  // localization grid, one per frame
  BfImage bmode;                   // first frame, beamforming grid
  std::optional<PowerDopplerMap> power_doppler;
};

BeamformerProducts beamform_stack(std::span<const RfFrame> frames, const PipelineConfig& config,
                                  Beamformer beamformer, std::vector<std::string>* warnings = nullptr);

struct CombinationResult {
  Beamformer beamformer = Beamformer::DAS;
  Localizer localizer = Localizer::RS;
  std::vector<Detection> detections;
  std::vector<Track> tracks;
  SuperResMap density;
  SuperResMap velocity;
  MetricReport report;
};

CombinationResult localize_and_track(const BeamformerProducts& products, const PipelineConfig& config,
                                     Localizer localizer, std::vector<std::string>* warnings = nullptr);

/// Local contrast and, when a region is configured, lateral spread of a map.
/// Unscorable quantities come back as NaN with a warning.
MetricReport evaluate_map(const Raster<double>& map, const BeamGrid& grid, const MetricSettings& settings,
                          double lambda, std::string beamformer, std::string localizer,
                          std::vector<std::string>* warnings = nullptr);

/// Noise-free trajectories of the simulated bubbles, one track per canal pass.
std::vector<Track> ground_truth_tracks(const PipelineConfig& config);
SuperResMap ground_truth_density(const PipelineConfig& config);

struct PipelineResult {
  std::vector<BeamformerProducts> beamformed;
  std::vector<CombinationResult> combinations;
  SuperResMap ground_truth;
  std::vector<std::string> warnings;
};

PipelineResult run_pipeline(const PipelineConfig& config, std::span<const RfFrame> frames);

/// Writes every raster, CSV and the effective config below dir. The output
/// is a pure function of (result, config).
void write_outputs(const PipelineResult& result, const PipelineConfig& config, const std::string& dir);

/// Mean over the region's rows of the lateral map profile.
std::vector<double> mean_lateral_profile(const Raster<double>& map, const BeamGrid& grid, const Region& region);

/// Indices of local maxima at least rel_height * max tall, pairwise at least
/// min_separation bins apart, with a dip below valley_ratio * (lower peak)
/// between neighbours.
std::vector<std::size_t> distinct_peaks(std::span<const double> profile, std::size_t min_separation,
                                        double rel_height = 0.3, double valley_ratio = 0.8);

}  // namespace ulm
