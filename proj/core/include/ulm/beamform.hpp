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

#include "ulm/raster.hpp"
#include "ulm/rfsim.hpp"

namespace ulm {

/// Uniform pixel grid. x(i) and z(j) are pixel centers.
struct BeamGrid {
  double x0 = 0.0;
  double dx = 0.0;
  std::size_t nx = 0;
  double z0 = 0.0;
  double dz = 0.0;
  std::size_t nz = 0;

  double x(std::size_t col) const { return x0 + static_cast<double>(col) * dx; }
  double z(std::size_t row) const { return z0 + static_cast<double>(row) * dz; }
  bool empty() const { return nx == 0 || nz == 0; }

  /// Grid covering [x_min, x_max] x [z_min, z_max], first pixel on the corner.
  static BeamGrid span(double x_min, double x_max, double z_min, double z_max, double pitch_x,
                       double pitch_z);
  static BeamGrid span(double x_min, double x_max, double z_min, double z_max, double pitch) {
    return span(x_min, x_max, z_min, z_max, pitch, pitch);
  }

  /// Same lateral sampling, axial pitch divided by factor; shares z0 so that
  /// every factor-th fine row coincides with a row of this grid.
  BeamGrid refined_axial(std::size_t factor) const;

  void validate() const;

  bool operator==(const BeamGrid&) const = default;
};

enum class ApodKind { rect, hann };

struct Apodization {
  ApodKind kind = ApodKind::hann;
  double f_number = 1.0;

  /// Receive weight in [0, 1] for an element at lateral distance
  /// lateral_offset from a pixel at depth z.
  double weight(double lateral_offset, double z) const;

  bool operator==(const Apodization&) const = default;
};

enum class ImageKind { rf_grid, envelope, bmode_db };
enum class Beamformer { DAS, FDMAS };

const char* to_string(Beamformer bf);

/// Image values are [n_z x n_x].
struct BfImage {
  Raster<double> values;
  BeamGrid grid;
  ImageKind kind = ImageKind::rf_grid;
  Beamformer beamformer = Beamformer::DAS;
};

struct BandpassSpec {
  double center = 0.0;  // Hz; 0 selects 2 fc
  double fractional_bandwidth = 0.6;
  std::size_t n_taps = 63;

  bool operator==(const BandpassSpec&) const = default;
};

/// Two-way delay of a non-steered plane wave: transmit leg z_p plus the
/// receive path back to the element at x_i.
double propagation_delay(double x_p, double z_p, double x_i, double c);

double signed_sqrt(double u);

/// Sum over all channel pairs i < j of v_i * v_j, evaluated as
/// ((sum v)^2 - sum v^2) / 2.
double dmas_pixel(std::span<const double> v);

BfImage das_image(const RfFrame& frame, const BeamGrid& grid, const Apodization& apod);

/// Pairwise-product image before the 2 fc bandpass.
BfImage dmas_image(const RfFrame& frame, const BeamGrid& grid, const Apodization& apod);

BfImage fdmas_image(const RfFrame& frame, const BeamGrid& grid, const Apodization& apod,
                    const BandpassSpec& bpf);

/// Temporal sample rate equivalent to the grid's axial pitch (two-way travel).
double axial_sample_rate(const BeamGrid& grid, double c);

/// Hamming-windowed sinc bandpass with unit gain at the center frequency.
std::vector<double> design_bandpass(const BandpassSpec& bpf, double fc, double fs);

/// Zero-phase filtering: the symmetric FIR applied forward then backward
/// with reflected edges.
std::vector<double> filtfilt(std::span<const double> taps, std::span<const double> signal);

/// Magnitude of the analytic signal along one line.
std::vector<double> analytic_magnitude(std::span<const double> line);

BfImage envelope(const BfImage& img);
BfImage log_compress(const BfImage& img, double dynamic_range_db = 60.0);

/// Keeps every factor-th row, starting with row 0.
BfImage decimate_axial(const BfImage& img, std::size_t factor);

}  // namespace ulm
