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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ulm/beamform.hpp"
#include "ulm/localize.hpp"
#include "ulm/metrics.hpp"
#include "ulm/rfsim.hpp"
#include "ulm/track.hpp"

namespace ulm {

// RF container, little-endian throughout:
//   "ULMF" | u16 version | u32 n_frames | u32 n_samples | u32 n_channels |
//   f64 pitch | f64 fc | f64 fs | f64 c | f64 frame_rate | f64 t0 |
//   f32 payload, frame-major, sample-major within a frame.
inline constexpr char kContainerMagic[4] = {'U', 'L', 'M', 'F'};
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 4 + 2 + 3 * 4 + 6 * 8;

struct ContainerHeader {
  std::uint16_t version = kContainerVersion;
  std::uint32_t n_frames = 0;
  std::uint32_t n_samples = 0;
  std::uint32_t n_channels = 0;
  Probe probe;
  double t0 = 0.0;

  std::uint64_t payload_bytes() const {
    return std::uint64_t{n_frames} * n_samples * n_channels * sizeof(float);
  }
};

/// Frames must share sample count, probe and t0.
void write_container(const std::string& path, std::span<const RfFrame> frames);
ContainerHeader read_container_header(const std::string& path);
std::vector<RfFrame> read_container(const std::string& path);

/// Raster written as <stem>.f32 (raw little-endian row-major) with a
/// <stem>.txt key=value sidecar describing the grid.
struct RasterFile {
  Raster<double> values;
  BeamGrid grid;
  std::string kind;
};

void write_raster(const std::string& stem, const Raster<double>& values, const BeamGrid& grid,
                  const std::string& kind);
/// Accepts the .f32 path, the .txt sidecar path, or the bare stem.
RasterFile read_raster(const std::string& path);

/// 8-bit binary PGM, linearly mapping [lo, hi] to [0, 255].
void write_pgm(const std::string& path, const Raster<double>& values, double lo, double hi);

void write_detections_csv(const std::string& path, std::span<const Detection> detections);
void write_tracks_csv(const std::string& path, std::span<const Track> tracks);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricReport& report);
void write_metrics_csv(const std::string& path, std::span<const MetricReport> reports);

}  // namespace ulm
