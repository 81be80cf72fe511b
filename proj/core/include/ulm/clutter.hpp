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
#include <vector>

#include <Eigen/Dense>

#include "ulm/beamform.hpp"

namespace ulm {

/// Frames on a common grid. The Casorati view is [n_pixels x n_frames].
struct ImageStack {
  std::vector<BfImage> frames;

  void validate() const;
  std::size_t n_pixels() const;
  Eigen::MatrixXd casorati() const;
  /// Replaces frame values with the columns of c, keeping grid and kind.
  ImageStack with_casorati(const Eigen::MatrixXd& c) const;
};

/// Singular values of the Casorati matrix, descending.
Eigen::VectorXd casorati_singular_values(const ImageStack& stack);

/// Zeroes the cut_low largest and cut_high smallest singular components.
ImageStack svd_filter(const ImageStack& stack, std::size_t cut_low, std::size_t cut_high);

}  // namespace ulm
