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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ulm/metrics.hpp"

namespace ulm {
namespace {

constexpr double kLambda = 1540.0 / 15.625e6;

Raster<double> gaussian_blur(const Raster<double>& in, double sigma) {
  const int half = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * half + 1);
  for (int i = -half; i <= half; ++i) k[i + half] = std::exp(-0.5 * i * i / (sigma * sigma));
  Raster<double> tmp(in.rows(), in.cols()), out(in.rows(), in.cols());
  const auto R = static_cast<int>(in.rows()), C = static_cast<int>(in.cols());
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c)
      for (int i = -half; i <= half; ++i)
        if (c + i >= 0 && c + i < C) tmp(r, c) += k[i + half] * in(r, c + i);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c)
      for (int i = -half; i <= half; ++i)
        if (r + i >= 0 && r + i < R) out(r, c) += k[i + half] * tmp(r + i, c);
  return out;
}

Raster<double> random_map(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  Raster<double> m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

struct Ridge {
  Raster<double> map;
  BeamGrid grid;
  Region region;
};

Ridge vertical_ridge(std::size_t width_bins = 1) {
  Ridge r;
  r.grid = BeamGrid::span(0.0, 39 * 0.1 * kLambda, 0.0, 29 * 0.1 * kLambda, 0.1 * kLambda);
  r.map = Raster<double>(30, 40);
  for (std::size_t row = 0; row < 30; ++row)
    for (std::size_t c = 20; c < 20 + width_bins; ++c) r.map(row, c) = 1.0;
  r.region = {r.grid.x(10), r.grid.x(30), r.grid.z(5), r.grid.z(24)};
  return r;
}

TEST(LocalStd, ConstantMapIsZero) {
  const Raster<double> m(5, 6, 2.5);
  const auto s = local_std_image(m);
  ASSERT_EQ(s.rows(), 4u);
  ASSERT_EQ(s.cols(), 5u);
  for (double v : s.data()) EXPECT_EQ(v, 0.0);
}

TEST(LocalStd, SingleCornerWindow) {
  Raster<double> m(2, 2);
  m(0, 0) = 1.0;
  const auto s = local_std_image(m);
  EXPECT_NEAR(s(0, 0), std::sqrt((3 * 0.25 * 0.25 + 0.75 * 0.75) / 4.0), 1e-15);
  EXPECT_NEAR(s(0, 0), 0.4330, 5e-5);
}

TEST(LocalStd, MatchesBruteForce) {
  const auto m = random_map(4, 6, 6);
  const auto s = local_std_image(m);
  const auto ref = oracle::local_std(m);
  for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(s.data()[k], ref.data()[k], 1e-12);
}

TEST(LocalStd, AllZeroRejected) { EXPECT_THROW(local_std_image(Raster<double>(3, 3)), std::invalid_argument); }

TEST(Contrast, ConstantMapScoresZero) {
  for (auto mode : {ContrastMode::masked, ContrastMode::full}) {
    const auto s = local_contrast_score(Raster<double>(4, 4, 7.0), mode);
    EXPECT_EQ(s.mean, 0.0);
    EXPECT_EQ(s.std, 0.0);
  }
}

TEST(Contrast, SinglePixelMatchesOracle) {
  Raster<double> m(5, 5);
  m(2, 3) = 4.0;
  const auto ref = oracle::local_std(m);
  double masked_sum = 0.0, full_sum = 0.0;
  std::size_t masked_n = 0;
  for (std::size_t r = 0; r < ref.rows(); ++r)
    for (std::size_t c = 0; c < ref.cols(); ++c) {
      full_sum += ref(r, c);
      const bool touches = (r == 2 || r + 1 == 2) && (c == 3 || c + 1 == 3);
      if (touches) {
        masked_sum += ref(r, c);
        ++masked_n;
      }
    }
  const auto masked = local_contrast_score(m, ContrastMode::masked);
  EXPECT_EQ(masked.windows, 4u);
  EXPECT_NEAR(masked.mean, masked_sum / masked_n, 1e-15);
  EXPECT_NEAR(masked.std, 0.0, 1e-15);
  const auto full = local_contrast_score(m, ContrastMode::full);
  EXPECT_EQ(full.windows, 16u);
  EXPECT_NEAR(full.mean, full_sum / 16.0, 1e-15);
}

TEST(Contrast, BinaryCanalBeatsBlurredCopy) {
  Raster<double> m(40, 40);
  for (std::size_t r = 0; r < 40; ++r) {
    m(r, 12) = 1.0;
    m(r, 27) = 1.0;
  }
  const auto blurred = gaussian_blur(m, 2.0);
  for (auto mode : {ContrastMode::masked, ContrastMode::full})
    EXPECT_GT(local_contrast_score(m, mode).mean, local_contrast_score(blurred, mode).mean);
}

TEST(Contrast, ScaleInvariant) {
  const auto m = random_map(9, 7, 8);
  const auto a = local_contrast_score(m);
  for (double k : {1e-6, 0.5, 300.0}) {
    Raster<double> s = m;
    for (double& v : s.data()) v *= k;
    const auto b = local_contrast_score(s);
    EXPECT_NEAR(a.mean, b.mean, 1e-13);
    EXPECT_NEAR(a.std, b.std, 1e-13);
  }
}

TEST(Fwhm, Triangle) {
  const std::vector<double> p{0.0, 0.5, 1.0, 0.5, 0.0};
  const auto w = fwhm(p, 0.3);
  EXPECT_NEAR(w.width, 0.6, 1e-15);
  EXPECT_FALSE(w.censored);
}

TEST(Fwhm, Impulse) {
  const std::vector<double> p{0.0, 1.0, 0.0};
  EXPECT_NEAR(fwhm(p, 2.0).width, 2.0, 1e-15);
}

TEST(Fwhm, ConstantIsCensoredSampleSpan) {
  const std::vector<double> p(7, 3.0);
  const auto w = fwhm(p, 1.0);
  EXPECT_TRUE(w.censored);
  EXPECT_NEAR(w.width, 6.0, 1e-15);
}

TEST(Fwhm, InvariantUnderDoubling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p(15), q(15);
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = u(rng) * std::exp(-0.1 * (static_cast<double>(k) - 7.0) * (static_cast<double>(k) - 7.0));
      q[k] = p[k] + p[k];
    }
    const auto a = fwhm(p, 0.1), b = fwhm(q, 0.1);
    EXPECT_NEAR(a.width, b.width, 1e-15);
    EXPECT_EQ(a.censored, b.censored);
  }
}

TEST(LateralSpread, OneBinRidgeIsTenthLambda) {
  const auto r = vertical_ridge();
  const auto s = lateral_spread_score(r.map, r.grid, r.region, kLambda);
  EXPECT_NEAR(s.spread_lambda, 0.1, 1e-12);
  EXPECT_EQ(s.rows_used, 20u);
  EXPECT_EQ(s.rows_censored, 0u);
}

TEST(LateralSpread, BlurWidens) {
  const auto r = vertical_ridge();
  const auto sharp = lateral_spread_score(r.map, r.grid, r.region, kLambda).spread_lambda;
  Raster<double> blurred(r.map.rows(), r.map.cols());
  for (std::size_t row = 0; row < r.map.rows(); ++row)
    for (std::size_t c = 1; c + 1 < r.map.cols(); ++c)
      blurred(row, c) = 0.25 * r.map(row, c - 1) + 0.5 * r.map(row, c) + 0.25 * r.map(row, c + 1);
  EXPECT_GT(lateral_spread_score(blurred, r.grid, r.region, kLambda).spread_lambda, sharp);
}

TEST(LateralSpread, ScaleAndVerticalShiftInvariant) {
  auto r = vertical_ridge(3);
  for (std::size_t row = 0; row < 30; ++row) r.map(row, 21) = 2.0;
  const double base = lateral_spread_score(r.map, r.grid, r.region, kLambda).spread_lambda;
  Raster<double> scaled = r.map;
  for (double& v : scaled.data()) v *= 17.0;
  EXPECT_NEAR(lateral_spread_score(scaled, r.grid, r.region, kLambda).spread_lambda, base, 1e-14);
  Region shifted = r.region;
  shifted.z_min -= 3 * r.grid.dz;
  shifted.z_max -= 3 * r.grid.dz;
  EXPECT_NEAR(lateral_spread_score(r.map, r.grid, shifted, kLambda).spread_lambda, base, 1e-14);
}

TEST(LateralSpread, RejectsRegionOutsideMap) {
  const auto r = vertical_ridge();
  Region far{1.0, 2.0, 1.0, 2.0};
  EXPECT_THROW(lateral_spread_score(r.map, r.grid, far, kLambda), std::invalid_argument);
  const Raster<double> flat(30, 40, 1.0);
  EXPECT_THROW(lateral_spread_score(flat, r.grid, r.region, kLambda), std::invalid_argument);
}

}  // namespace
}  // namespace ulm
