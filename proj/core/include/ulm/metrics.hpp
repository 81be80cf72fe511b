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
#include <string>

#include "ulm/beamform.hpp"
#include "ulm/raster.hpp"

namespace ulm {

/// Which 2x2 windows enter the local contrast statistics.
enum class ContrastMode {
  masked,  // only windows touching a nonzero map value
  full,    // every window
};

/// Population standard deviation of every 2x2 window of the max-normalized
/// map; output is (rows - 1) x (cols - 1).
Raster<double> local_std_image(const Raster<double>& map);

struct ContrastScore {
  double mean = 0.0;
  double std = 0.0;
  std::size_t windows = 0;
};

ContrastScore local_contrast_score(const Raster<double>& map, ContrastMode mode = ContrastMode::masked);

struct FwhmResult {
  double width = 0.0;  // m
  bool censored = false;
};

/// Main-lobe width at half of the global maximum with linear interpolation
/// of each crossing. A side without a crossing extends to the array edge and
/// marks the result censored.
FwhmResult fwhm(std::span<const double> profile, double pitch);

/// Axis-aligned region in meters; bins whose centers fall inside belong to it.
struct Region {
  double x_min = 0.0;
  double x_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;

  bool operator==(const Region&) const = default;
};

struct LateralSpread {
  double spread_lambda = 0.0;
  std::size_t rows_used = 0;
  std::size_t rows_censored = 0;
  std::size_t rows_empty = 0;
};

/// Mean lateral FWHM over the rows of a vertical-canal region, in wavelengths.
LateralSpread lateral_spread_score(const Raster<double>& map, const BeamGrid& grid, const Region& region,
                                   double lambda);

struct MetricReport {
  std::string beamformer;
  std::string localizer;
  double local_contrast_mean = 0.0;
  double local_contrast_std = 0.0;
  double lateral_spread_lambda = 0.0;  // NaN when no region was scored
};

}  // namespace ulm
