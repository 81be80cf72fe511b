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

#include "ulm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ulm {

Raster<double> local_std_image(const Raster<double>& map) {
  if (map.rows() < 2 || map.cols() < 2) throw std::invalid_argument("local_std_image: map must be at least 2x2");
  double peak = 0.0;
  for (double v : map.data()) {
    if (v < 0.0) throw std::invalid_argument("local_std_image: map must be non-negative");
    peak = std::max(peak, v);
  }
  if (!(peak > 0.0)) throw std::invalid_argument("local_std_image: all-zero map cannot be normalized");

  Raster<double> out(map.rows() - 1, map.cols() - 1);
  for (std::size_t r = 0; r + 1 < map.rows(); ++r) {
    for (std::size_t c = 0; c + 1 < map.cols(); ++c) {
      const double a = map(r, c) / peak;
      const double b = map(r, c + 1) / peak;
      const double d = map(r + 1, c) / peak;
      const double e = map(r + 1, c + 1) / peak;
      const double mean = 0.25 * (a + b + d + e);
      const double var = 0.25 * ((a - mean) * (a - mean) + (b - mean) * (b - mean) +
                                 (d - mean) * (d - mean) + (e - mean) * (e - mean));
      out(r, c) = std::sqrt(var);
    }
  }
  return out;
}

ContrastScore local_contrast_score(const Raster<double>& map, ContrastMode mode) {
  const Raster<double> local = local_std_image(map);
  ContrastScore score;
  double sum = 0.0;
  for (std::size_t r = 0; r < local.rows(); ++r) {
    for (std::size_t c = 0; c < local.cols(); ++c) {
      if (mode == ContrastMode::masked) {
        const bool touches = map(r, c) > 0.0 || map(r, c + 1) > 0.0 || map(r + 1, c) > 0.0 ||
                             map(r + 1, c + 1) > 0.0;
        if (!touches) continue;
      }
      sum += local(r, c);
      ++score.windows;
    }
  }
  if (score.windows == 0) return score;
  score.mean = sum / static_cast<double>(score.windows);
  double sq = 0.0;
  for (std::size_t r = 0; r < local.rows(); ++r) {
    for (std::size_t c = 0; c < local.cols(); ++c) {
      if (mode == ContrastMode::masked) {
        const bool touches = map(r, c) > 0.0 || map(r, c + 1) > 0.0 || map(r + 1, c) > 0.0 ||
                             map(r + 1, c + 1) > 0.0;
        if (!touches) continue;
      }
      sq += (local(r, c) - score.mean) * (local(r, c) - score.mean);
    }
  }
  score.std = std::sqrt(sq / static_cast<double>(score.windows));
  return score;
}

FwhmResult fwhm(std::span<const double> profile, double pitch) {
  if (profile.empty()) throw std::invalid_argument("fwhm: empty profile");
  const auto peak_it = std::max_element(profile.begin(), profile.end());
  const double peak = *peak_it;
  if (!(peak > 0.0)) throw std::invalid_argument("fwhm: all-zero profile");
  const double half = 0.5 * peak;
  const auto peak_idx = static_cast<std::size_t>(peak_it - profile.begin());

  FwhmResult result;
  double left = 0.0;
  {
    std::size_t k = peak_idx;
    while (k > 0 && profile[k - 1] > half) --k;
    if (k == 0) {
      left = 0.0;
      result.censored = true;
    } else {
      // Crossing between k-1 (<= half) and k (> half).
      const double lo = profile[k - 1];
      const double hi = profile[k];
      left = static_cast<double>(k - 1) + (half - lo) / (hi - lo);
    }
  }
  double right = 0.0;
  {
    std::size_t k = peak_idx;
    while (k + 1 < profile.size() && profile[k + 1] > half) ++k;
    if (k + 1 == profile.size()) {
      right = static_cast<double>(profile.size() - 1);
      result.censored = true;
    } else {
      const double hi = profile[k];
      const double lo = profile[k + 1];
      right = static_cast<double>(k) + (hi - half) / (hi - lo);
    }
  }
  result.width = (right - left) * pitch;
  return result;
}

LateralSpread lateral_spread_score(const Raster<double>& map, const BeamGrid& grid, const Region& region,
                                   double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lateral_spread_score: lambda must be > 0");
  if (map.rows() != grid.nz || map.cols() != grid.nx)
    throw std::invalid_argument("lateral_spread_score: map does not match its grid");
  const auto index_range = [](double lo, double hi, double first, double pitch) {
    const double a = std::ceil((lo - first) / pitch - 1e-9);
    const double b = std::floor((hi - first) / pitch + 1e-9);
    return std::pair{a, b};
  };
  const auto [c0, c1] = index_range(region.x_min, region.x_max, grid.x0, grid.dx);
  const auto [r0, r1] = index_range(region.z_min, region.z_max, grid.z0, grid.dz);
  if (c0 < 0.0 || r0 < 0.0 || c1 >= static_cast<double>(grid.nx) || r1 >= static_cast<double>(grid.nz))
    throw std::invalid_argument("lateral_spread_score: region outside the map");
  if (c1 < c0 || r1 < r0) throw std::invalid_argument("lateral_spread_score: region holds no bins");

  LateralSpread out;
  double sum = 0.0;
  std::vector<double> profile;
  for (auto r = static_cast<std::size_t>(r0); r <= static_cast<std::size_t>(r1); ++r) {
    profile.clear();
    for (auto c = static_cast<std::size_t>(c0); c <= static_cast<std::size_t>(c1); ++c)
      profile.push_back(map(r, c));
    if (std::all_of(profile.begin(), profile.end(), [](double v) { return v == 0.0; })) {
      ++out.rows_empty;
      continue;
    }
    const FwhmResult f = fwhm(profile, grid.dx);
    if (f.censored) {
      ++out.rows_censored;
      continue;
    }
    sum += f.width;
    ++out.rows_used;
  }
  if (out.rows_used == 0) throw std::invalid_argument("lateral_spread_score: no valid rows in region");
  out.spread_lambda = sum / static_cast<double>(out.rows_used) / lambda;
  return out;
}

}  // namespace ulm
