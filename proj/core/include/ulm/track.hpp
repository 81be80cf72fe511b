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
#include <span>
#include <vector>

#include "ulm/beamform.hpp"
#include "ulm/clutter.hpp"
#include "ulm/localize.hpp"

namespace ulm {

struct Velocity {
  double vx = 0.0;  // m/s
  double vz = 0.0;

  double magnitude() const;
  bool operator==(const Velocity&) const = default;
};

struct Track {
  std::size_t id = 0;
  std::vector<Detection> detections;  // strictly increasing frame_index
  std::vector<Velocity> velocities;   // detections.size() - 1 entries

  bool operator==(const Track&) const = default;
};

struct TrackerParams {
  double max_link_distance = 0.0;  // m
  std::size_t max_gap = 0;         // frames a track may go unmatched
  std::size_t min_track_length = 5;

  bool operator==(const TrackerParams&) const = default;
};

/// Greedy frame-to-frame nearest-neighbor linking. Detections must be sorted
/// by frame_index. Track ids are assigned in order of creation.
std::vector<Track> link_detections(std::span<const Detection> detections,
                                   const TrackerParams& params, double frame_rate);

/// Finite-difference velocity between consecutive detections, scaled by the
/// frame gap.
std::vector<Velocity> velocities(const Track& track, double frame_rate);

enum class MapKind { density, velocity, power_doppler };

const char* to_string(MapKind kind);

/// Super-resolved raster. Bin (r, c) covers
/// [grid.x(c) - dx/2, grid.x(c) + dx/2) x [grid.z(r) - dz/2, grid.z(r) + dz/2).
struct SuperResMap {
  BeamGrid grid;
  Raster<double> values;
  MapKind kind = MapKind::density;
  std::size_t samples_total = 0;
  std::size_t samples_outside = 0;
};

/// Map grid covering the image grid's field of view at the given pitch.
BeamGrid super_res_grid(const BeamGrid& image_grid, double pitch);

/// Points along the track at arc-length steps no longer than max_step,
/// paired with the velocity of the segment they lie on.
struct TrackSample {
  Point position;
  double speed = 0.0;
};
std::vector<TrackSample> resample_track(const Track& track, double max_step);

SuperResMap render_density(std::span<const Track> tracks, const BeamGrid& grid, double step);
SuperResMap render_velocity(std::span<const Track> tracks, const BeamGrid& grid, double step);

struct PowerDopplerMap {
  BeamGrid grid;
  Raster<double> power;  // mean of value^2 over frames
  Raster<double> db;     // 10 log10(power / max power), floored at -floor_db
};

PowerDopplerMap power_doppler(const ImageStack& stack, double floor_db = 60.0);

}  // namespace ulm
