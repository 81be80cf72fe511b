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

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "ulm/beamform.hpp"

namespace ulm {

enum class Localizer { SpInterp, GaussFit, WA, RS };

inline constexpr std::array<Localizer, 4> kAllLocalizers = {Localizer::RS, Localizer::WA,
                                                            Localizer::GaussFit, Localizer::SpInterp};

const char* to_string(Localizer method);
std::optional<Localizer> parse_localizer(std::string_view name);

struct Detection {
  double x = 0.0;  // m
  double z = 0.0;  // m
  double intensity = 0.0;
  std::size_t frame_index = 0;
  Localizer method = Localizer::RS;

  bool operator==(const Detection&) const = default;
};

/// 5x5 linear-intensity crop around a local maximum. values[r][c] with r
/// axial and c lateral; the center sample is values[2][2].
struct Patch {
  static constexpr std::size_t kSize = 5;
  static constexpr std::size_t kHalf = 2;

  std::array<std::array<double, kSize>, kSize> values{};
  std::size_t row = 0;  // center pixel in the source image
  std::size_t col = 0;
  double center_x = 0.0;  // m
  double center_z = 0.0;  // m
  double pitch_x = 0.0;   // m
  double pitch_z = 0.0;   // m

  double center_value() const { return values[kHalf][kHalf]; }
};

struct DetectorParams {
  std::size_t max_count = 30;
  std::size_t min_separation_px = 3;
  double threshold_rel = 0.3;

  bool operator==(const DetectorParams&) const = default;
};

/// Which image line feeds which weighted-average estimate. `matched` uses
/// the central row for the lateral offset and the central column for the
/// axial one; `literal` swaps them.
enum class WaLines { matched, literal };

struct LocalizerOptions {
  WaLines wa_lines = WaLines::matched;

  bool operator==(const LocalizerOptions&) const = default;
};

std::vector<Patch> detect_candidates(const BfImage& img, const DetectorParams& params);

Detection localize_sp_interp(const Patch& patch);
std::optional<Detection> localize_gauss_fit(const Patch& patch);
std::optional<Detection> localize_weighted_average(const Patch& patch,
                                                   WaLines lines = WaLines::matched);
std::optional<Detection> localize_radial_symmetry(const Patch& patch);

std::optional<Detection> localize_patch(const Patch& patch, Localizer method,
                                        const LocalizerOptions& options = {});

std::vector<Detection> localize_frame(const BfImage& img, std::size_t frame_index,
                                      Localizer method, const DetectorParams& params,
                                      const LocalizerOptions& options = {});

}  // namespace ulm
