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
#include <optional>
#include <vector>

#include "ulm/raster.hpp"

namespace ulm {

struct Point {
  double x = 0.0;  // lateral, meters
  double z = 0.0;  // axial (depth), meters

  bool operator==(const Point&) const = default;
};

/// Linear array insonifying with non-steered plane waves.
struct Probe {
  std::size_t n_elements = 128;
  double pitch = 0.11e-3;     // m
  double fc = 15.625e6;       // Hz
  double fs = 100e6;          // Hz
  double c = 1540.0;          // m/s
  double frame_rate = 500.0;  // Hz

  double wavelength() const { return c / fc; }
  /// Element centers are symmetric about x = 0.
  double element_x(std::size_t i) const;
  double aperture_half_width() const;

  /// Throws std::invalid_argument on a broken invariant.
  void validate() const;

  bool operator==(const Probe&) const = default;
};

/// A vessel as a polyline of control points. Bubbles flow from the first
/// control point to the last.
struct Canal {
  std::vector<Point> points;
  double diameter = 0.0;  // m
  double speed = 0.0;     // m/s, mean flow speed along the axis

  double length() const;
  /// Position and unit tangent at arc length s in [0, length()].
  Point point_at(double s) const;
  Point tangent_at(double s) const;

  bool operator==(const Canal&) const = default;
};

struct PhantomSpec {
  std::vector<Canal> canals;
  std::size_t bubbles_per_frame = 8;
  std::size_t n_frames = 200;
  /// White-noise level relative to the peak echo in dB; nullopt disables noise.
  std::optional<double> noise_db = -20.0;
  std::uint64_t rng_seed = 1;
  double z_min = 1e-3;            // spreading-loss floor, m
  std::size_t pulse_cycles = 5;

  void validate(const Probe& probe) const;

  bool operator==(const PhantomSpec&) const = default;
};

/// Per-channel RF samples of one plane-wave acquisition.
struct RfFrame {
  Raster<float> samples;  // [n_samples x n_channels]
  std::size_t frame_index = 0;
  Probe probe;
  double t0 = 0.0;  // s, time of the first sample relative to transmit

  std::size_t n_samples() const { return samples.rows(); }
  std::size_t n_channels() const { return samples.cols(); }
};

/// A scatterer with the identity needed to build ground-truth trajectories.
struct Bubble {
  Point position;
  std::size_t canal = 0;
  std::size_t slot = 0;   // bubble index within the phantom
  std::uint64_t pass = 0;  // how many times the slot has re-entered its canal
};

/// Hann-windowed cosine at fc sampled at fs, peak 1 at the window center.
std::vector<double> make_pulse(const Probe& probe, std::size_t n_cycles);

/// Continuous counterpart of make_pulse evaluated at tau seconds from the
/// pulse center. Zero outside the pulse support.
double pulse_value(const Probe& probe, std::size_t n_cycles, double tau);

std::vector<Bubble> advance_bubbles(const PhantomSpec& spec, double frame_rate,
                                    std::size_t frame_index);

/// Samples needed to hold every echo from the phantom's field.
std::size_t record_length(const PhantomSpec& spec, const Probe& probe);

/// Noise-free echoes of the given scatterers plus optional white noise.
RfFrame simulate_scatterers(const std::vector<Point>& scatterers, const Probe& probe,
                            std::size_t n_samples, std::size_t n_cycles,
                            double z_min = 1e-3, double noise_sigma = 0.0,
                            std::uint64_t noise_seed = 0, std::size_t frame_index = 0);

RfFrame simulate_frame(const PhantomSpec& spec, const Probe& probe, std::size_t frame_index);

/// Standard deviation of the additive noise implied by spec.noise_db.
double noise_sigma(const PhantomSpec& spec);

/// Reduced analogue of the in-silico vessel phantom: a pair of vertical
/// canals 0.4 lambda apart, one horizontal canal and one S-shaped canal.
PhantomSpec default_phantom(const Probe& probe);

}  // namespace ulm
