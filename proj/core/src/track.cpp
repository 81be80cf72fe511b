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

#include "ulm/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace ulm {
namespace {

struct OpenTrack {
  std::size_t id = 0;
  std::vector<Detection> detections;
};

bool coordinate_less(const Detection& a, const Detection& b) {
  return std::tie(a.x, a.z, a.intensity) < std::tie(b.x, b.z, b.intensity);
}

// Returns the bin index along one axis, or -1 when outside.
std::ptrdiff_t bin_index(double coord, double first_center, double pitch, std::size_t n) {
  const double pos = std::floor((coord - (first_center - 0.5 * pitch)) / pitch);
  if (!(pos >= 0.0) || pos >= static_cast<double>(n)) return -1;
  return static_cast<std::ptrdiff_t>(pos);
}

}  // namespace

double Velocity::magnitude() const { return std::hypot(vx, vz); }

const char* to_string(MapKind kind) {
  switch (kind) {
    case MapKind::density: return "density";
    case MapKind::velocity: return "velocity";
    case MapKind::power_doppler: return "power_doppler";
  }
  return "?";
}

std::vector<Velocity> velocities(const Track& track, double frame_rate) {
  if (track.detections.size() < 2) throw std::invalid_argument("velocities: track needs >= 2 detections");
  std::vector<Velocity> out;
  out.reserve(track.detections.size() - 1);
  for (std::size_t k = 0; k + 1 < track.detections.size(); ++k) {
    const Detection& a = track.detections[k];
    const Detection& b = track.detections[k + 1];
    const double frames = static_cast<double>(b.frame_index - a.frame_index);
    out.push_back({(b.x - a.x) * frame_rate / frames, (b.z - a.z) * frame_rate / frames});
  }
  return out;
}

std::vector<Track> link_detections(std::span<const Detection> detections, const TrackerParams& params,
                                   double frame_rate) {
  if (!(frame_rate > 0.0)) throw std::invalid_argument("link_detections: frame_rate must be > 0");
  for (std::size_t k = 1; k < detections.size(); ++k)
    if (detections[k].frame_index < detections[k - 1].frame_index)
      throw std::invalid_argument("link_detections: detections must be sorted by frame");

  std::vector<OpenTrack> open;
  std::vector<OpenTrack> closed;
  std::size_t next_id = 0;

  std::size_t begin = 0;
  while (begin < detections.size()) {
    const std::size_t frame = detections[begin].frame_index;
    std::size_t end = begin;
    while (end < detections.size() && detections[end].frame_index == frame) ++end;
    std::vector<Detection> current(detections.begin() + static_cast<std::ptrdiff_t>(begin),
                                   detections.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(current.begin(), current.end(), coordinate_less);
    begin = end;

    // Close tracks that have been unmatched for more than max_gap frames.
    auto stale = std::stable_partition(open.begin(), open.end(), [&](const OpenTrack& t) {
      return frame - t.detections.back().frame_index <= params.max_gap + 1;
    });
    std::move(stale, open.end(), std::back_inserter(closed));
    open.erase(stale, open.end());

    struct Pair {
      double distance;
      std::size_t track;
      std::size_t det;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < open.size(); ++t) {
      const Detection& tail = open[t].detections.back();
      for (std::size_t d = 0; d < current.size(); ++d) {
        const double dist = std::hypot(current[d].x - tail.x, current[d].z - tail.z);
        if (dist <= params.max_link_distance) pairs.push_back({dist, t, d});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      if (a.det != b.det) return a.det < b.det;  // current is coordinate-sorted
      const Detection& ta = open[a.track].detections.back();
      const Detection& tb = open[b.track].detections.back();
      if (ta.x != tb.x || ta.z != tb.z) return std::tie(ta.x, ta.z) < std::tie(tb.x, tb.z);
      return open[a.track].id < open[b.track].id;
    });

    std::vector<bool> track_used(open.size(), false);
    std::vector<bool> det_used(current.size(), false);
    for (const Pair& p : pairs) {
      if (track_used[p.track] || det_used[p.det]) continue;
      track_used[p.track] = true;
      det_used[p.det] = true;
      open[p.track].detections.push_back(current[p.det]);
    }
    for (std::size_t d = 0; d < current.size(); ++d)
      if (!det_used[d]) open.push_back({next_id++, {current[d]}});
  }
  std::move(open.begin(), open.end(), std::back_inserter(closed));

  std::sort(closed.begin(), closed.end(), [](const OpenTrack& a, const OpenTrack& b) { return a.id < b.id; });
  std::vector<Track> out;
  for (OpenTrack& t : closed) {
    if (t.detections.size() < std::max<std::size_t>(params.min_track_length, 1)) continue;
    Track track;
    track.id = out.size();
    track.detections = std::move(t.detections);
    if (track.detections.size() >= 2) track.velocities = velocities(track, frame_rate);
    out.push_back(std::move(track));
  }
  return out;
}

BeamGrid super_res_grid(const BeamGrid& image_grid, double pitch) {
  image_grid.validate();
  if (!(pitch > 0.0)) throw std::invalid_argument("super_res_grid: pitch must be > 0");
  const double width = static_cast<double>(image_grid.nx - 1) * image_grid.dx;
  const double height = static_cast<double>(image_grid.nz - 1) * image_grid.dz;
  BeamGrid g;
  g.dx = pitch;
  g.dz = pitch;
  g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(width / pitch)));
  g.nz = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(height / pitch)));
  g.x0 = image_grid.x0 + 0.5 * pitch;
  g.z0 = image_grid.z0 + 0.5 * pitch;
  return g;
}

std::vector<TrackSample> resample_track(const Track& track, double max_step) {
  if (!(max_step > 0.0)) throw std::invalid_argument("resample_track: step must be > 0");
  std::vector<TrackSample> out;
  const auto& d = track.detections;
  if (d.empty()) return out;
  if (d.size() == 1) {
    out.push_back({{d[0].x, d[0].z}, 0.0});
    return out;
  }
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double speed = k < track.velocities.size() ? track.velocities[k].magnitude() : 0.0;
    const double length = std::hypot(d[k + 1].x - d[k].x, d[k + 1].z - d[k].z);
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / max_step)));
    for (std::size_t j = 0; j < n; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(n);
      out.push_back({{d[k].x + t * (d[k + 1].x - d[k].x), d[k].z + t * (d[k + 1].z - d[k].z)}, speed});
    }
  }
  const double last_speed = track.velocities.empty() ? 0.0 : track.velocities.back().magnitude();
  out.push_back({{d.back().x, d.back().z}, last_speed});
  return out;
}

SuperResMap render_density(std::span<const Track> tracks, const BeamGrid& grid, double step) {
  grid.validate();
  SuperResMap map{grid, Raster<double>(grid.nz, grid.nx), MapKind::density, 0, 0};
  for (const Track& track : tracks) {
    for (const TrackSample& s : resample_track(track, step)) {
      ++map.samples_total;
      const auto c = bin_index(s.position.x, grid.x0, grid.dx, grid.nx);
      const auto r = bin_index(s.position.z, grid.z0, grid.dz, grid.nz);
      if (c < 0 || r < 0) {
        ++map.samples_outside;
        continue;
      }
      map.values(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += 1.0;
    }
  }
  return map;
}

SuperResMap render_velocity(std::span<const Track> tracks, const BeamGrid& grid, double step) {
  grid.validate();
  SuperResMap map{grid, Raster<double>(grid.nz, grid.nx), MapKind::velocity, 0, 0};
  Raster<double> counts(grid.nz, grid.nx);
  for (const Track& track : tracks) {
    for (const TrackSample& s : resample_track(track, step)) {
      ++map.samples_total;
      const auto c = bin_index(s.position.x, grid.x0, grid.dx, grid.nx);
      const auto r = bin_index(s.position.z, grid.z0, grid.dz, grid.nz);
      if (c < 0 || r < 0) {
        ++map.samples_outside;
        continue;
      }
      map.values(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += s.speed;
      counts(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += 1.0;
    }
  }
  auto values = map.values.data();
  const auto n = counts.data();
  double peak = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (n[k] > 0.0) values[k] /= n[k];
    peak = std::max(peak, values[k]);
  }
  if (peak > 0.0)
    for (double& v : values) v /= peak;
  return map;
}

PowerDopplerMap power_doppler(const ImageStack& stack, double floor_db) {
  stack.validate();
  const BfImage& first = stack.frames.front();
  PowerDopplerMap out{first.grid, Raster<double>(first.values.rows(), first.values.cols()),
                      Raster<double>(first.values.rows(), first.values.cols(), -floor_db)};
  auto power = out.power.data();
  for (const BfImage& f : stack.frames) {
    const auto v = f.values.data();
    for (std::size_t k = 0; k < power.size(); ++k) power[k] += v[k] * v[k];
  }
  const double n = static_cast<double>(stack.frames.size());
  double peak = 0.0;
  for (double& p : power) {
    p /= n;
    peak = std::max(peak, p);
  }
  if (peak > 0.0) {
    auto db = out.db.data();
    for (std::size_t k = 0; k < power.size(); ++k)
      db[k] = power[k] > 0.0 ? std::max(10.0 * std::log10(power[k] / peak), -floor_db) : -floor_db;
  }
  return out;
}

}  // namespace ulm
