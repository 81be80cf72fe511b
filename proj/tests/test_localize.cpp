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
#include <ostream>
#include <random>

#include "oracles.hpp"
#include "ulm/localize.hpp"
#include "ulm/pipeline.hpp"

namespace ulm {

void PrintTo(Beamformer b, std::ostream* os) { *os << to_string(b); }

namespace {

using oracle::gaussian_patch;

BfImage blob_image(std::size_t rows, std::size_t cols, const std::vector<std::array<double, 3>>& blobs,
                   double sigma = 0.8) {
  BfImage img;
  img.grid = BeamGrid::span(0.0, static_cast<double>(cols - 1), 0.0, static_cast<double>(rows - 1), 1.0);
  img.kind = ImageKind::envelope;
  img.values = Raster<double>(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      for (const auto& [x, z, a] : blobs) {
        const double dx = static_cast<double>(c) - x, dz = static_cast<double>(r) - z;
        img.values(r, c) += a * std::exp(-(dx * dx + dz * dz) / (2.0 * sigma * sigma));
      }
  return img;
}

std::optional<Detection> run(const Patch& p, Localizer m) { return localize_patch(p, m); }

TEST(Detect, SinglePeak) {
  const auto img = blob_image(20, 20, {{9.0, 11.0, 1.0}});
  const auto patches = detect_candidates(img, {});
  ASSERT_EQ(patches.size(), 1u);
  EXPECT_EQ(patches[0].row, 11u);
  EXPECT_EQ(patches[0].col, 9u);
  EXPECT_EQ(patches[0].center_value(), 1.0);
}

TEST(Detect, TwoPeaksInDescendingOrder) {
  const auto img = blob_image(20, 30, {{6.0, 8.0, 0.7}, {20.0, 10.0, 1.0}});
  const auto patches = detect_candidates(img, {});
  ASSERT_EQ(patches.size(), 2u);
  EXPECT_EQ(patches[0].col, 20u);
  EXPECT_EQ(patches[1].col, 6u);
}

TEST(Detect, SevenSeededPeaks) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pos(3, 46);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  std::vector<std::array<double, 3>> blobs;
  while (blobs.size() < 7) {
    const double x = pos(rng), z = pos(rng);
    bool far = true;
    for (const auto& b : blobs) far = far && std::max(std::abs(b[0] - x), std::abs(b[1] - z)) > 6.0;
    if (far) blobs.push_back({x, z, amp(rng)});
  }
  const auto img = blob_image(50, 50, blobs);
  const auto patches = detect_candidates(img, {});
  ASSERT_EQ(patches.size(), 7u);
  for (const auto& b : blobs) {
    const bool found = std::any_of(patches.begin(), patches.end(), [&](const Patch& p) {
      return p.col == static_cast<std::size_t>(b[0]) && p.row == static_cast<std::size_t>(b[1]);
    });
    EXPECT_TRUE(found) << b[0] << "," << b[1];
  }
}

TEST(Detect, ThresholdAndSeparation) {
  const auto img = blob_image(20, 40, {{8.0, 10.0, 1.0}, {11.0, 10.0, 0.9}, {30.0, 10.0, 0.2}});
  DetectorParams params;
  params.min_separation_px = 4;
  const auto patches = detect_candidates(img, params);
  ASSERT_EQ(patches.size(), 1u);
  params.min_separation_px = 3;
  EXPECT_EQ(detect_candidates(img, params).size(), 2u);
  params.threshold_rel = 0.1;
  EXPECT_EQ(detect_candidates(img, params).size(), 3u);
  params.max_count = 2;
  EXPECT_EQ(detect_candidates(img, params).size(), 2u);
}

TEST(Detect, RejectsNonEnvelope) {
  auto img = blob_image(10, 10, {{5.0, 5.0, 1.0}});
  img.kind = ImageKind::rf_grid;
  EXPECT_THROW(detect_candidates(img, {}), std::invalid_argument);
}

TEST(SpInterp, SymmetricPatchGivesCenter) {
  const auto d = localize_sp_interp(gaussian_patch(0.0, 0.0, 1.1));
  EXPECT_EQ(d.x, 0.0);
  EXPECT_EQ(d.z, 0.0);
}

TEST(SpInterp, ConstantPatchGivesCenter) {
  Patch p = gaussian_patch(0.0, 0.0, 1.0);
  for (auto& row : p.values) row.fill(0.4);
  const auto d = localize_sp_interp(p);
  EXPECT_EQ(d.x, 0.0);
  EXPECT_EQ(d.z, 0.0);
}

TEST(SpInterp, OffsetGaussianAgainstDenseOracle) {
  for (double sigma : {1.2, 1.5}) {
    const auto truth = oracle::dense_argmax(
        [&](double x, double z) {
          return std::exp(-((x - 0.3) * (x - 0.3) + (z + 0.2) * (z + 0.2)) / (2 * sigma * sigma));
        },
        2.0, 0.001);
    const auto d = localize_sp_interp(gaussian_patch(0.3, -0.2, sigma));
    EXPECT_LE(std::abs(d.x - truth.first), 0.05) << sigma;
    EXPECT_LE(std::abs(d.z - truth.second), 0.05) << sigma;
  }
}

// Argmax on the 0.1 px grid of a tensor-product natural cubic spline,
// computed independently with scipy.interpolate.CubicSpline.
TEST(SpInterp, MatchesReferenceSplineOnNarrowGaussian) {
  const auto d = localize_sp_interp(gaussian_patch(0.3, -0.2, 1.0));
  EXPECT_NEAR(d.x, 0.2, 1e-12);
  EXPECT_NEAR(d.z, -0.1, 1e-12);
}

TEST(GaussFit, RecoversOwnModel) {
  const auto d = localize_gauss_fit(gaussian_patch(0.25, -0.1, 1.0, 2.0, 0.3));
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(d->x, 0.25, 1e-3);
  EXPECT_NEAR(d->z, -0.1, 1e-3);
}

TEST(GaussFit, SymmetricPatchGivesCenter) {
  const auto d = localize_gauss_fit(gaussian_patch(0.0, 0.0, 0.9, 1.0, 0.05));
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(d->x, 0.0, 1e-9);
  EXPECT_NEAR(d->z, 0.0, 1e-9);
}

TEST(GaussFit, ConstantPatchFails) {
  Patch p = gaussian_patch(0.0, 0.0, 1.0);
  for (auto& row : p.values) row.fill(2.0);
  EXPECT_FALSE(localize_gauss_fit(p).has_value());
}

TEST(WeightedAverage, SymmetricPatchGivesCenter) {
  const auto d = localize_weighted_average(gaussian_patch(0.0, 0.0, 1.0));
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->x, 0.0);
  EXPECT_EQ(d->z, 0.0);
}

TEST(WeightedAverage, HandExample) {
  Patch p = gaussian_patch(0.0, 0.0, 1.0);
  for (auto& row : p.values) row.fill(0.0);
  p.values[2] = {0.0, 0.0, 1.0, 1.0, 0.0};
  for (std::size_t r = 0; r < 5; ++r) p.values[r][2] = 1.0;
  const auto d = localize_weighted_average(p);
  ASSERT_TRUE(d.has_value());
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < 5; ++c) {
    num += (static_cast<double>(c) - 2.0) * p.values[2][c];
    den += p.values[2][c];
  }
  EXPECT_DOUBLE_EQ(d->x, num / den);
  EXPECT_DOUBLE_EQ(d->x, 0.5);
  EXPECT_DOUBLE_EQ(d->z, 0.0);
}

TEST(WeightedAverage, MassAtEdgeClampsToTwoPixels) {
  Patch p = gaussian_patch(0.0, 0.0, 1.0);
  for (auto& row : p.values) row.fill(0.0);
  p.values[2] = {1.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t r : {0u, 1u, 3u, 4u}) p.values[r][2] = 1.0;
  const auto d = localize_weighted_average(p);
  ASSERT_TRUE(d.has_value());
  EXPECT_DOUBLE_EQ(d->x, -2.0);
  EXPECT_DOUBLE_EQ(d->z, 0.0);
}

TEST(WeightedAverage, LiteralLinesSwapAxes) {
  Patch p = gaussian_patch(0.0, 0.0, 1.0);
  for (auto& row : p.values) row.fill(0.0);
  p.values[2] = {0.0, 0.0, 1.0, 1.0, 0.0};
  for (std::size_t r = 0; r < 5; ++r) p.values[r][2] = 1.0;
  const auto d = localize_weighted_average(p, WaLines::literal);
  ASSERT_TRUE(d.has_value());
  EXPECT_DOUBLE_EQ(d->x, 0.0);
  EXPECT_DOUBLE_EQ(d->z, 0.5);
}

TEST(RadialSymmetry, CenteredGaussianIsExact) {
  const auto d = localize_radial_symmetry(gaussian_patch(0.0, 0.0, 1.2));
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(d->x, 0.0, 1e-9);
  EXPECT_NEAR(d->z, 0.0, 1e-9);
}

TEST(RadialSymmetry, OffsetGaussianAgainstDenseOracle) {
  const double sigma = 1.0;
  const auto truth = oracle::dense_argmax(
      [&](double x, double z) { return std::exp(-((x - 0.3) * (x - 0.3) + (z - 0.3) * (z - 0.3)) / (2 * sigma * sigma)); },
      2.0, 0.001);
  const auto d = localize_radial_symmetry(gaussian_patch(0.3, 0.3, sigma));
  ASSERT_TRUE(d.has_value());
  EXPECT_LE(std::abs(d->x - truth.first), 0.03);
  EXPECT_LE(std::abs(d->z - truth.second), 0.03);
}

TEST(RadialSymmetry, ConstantPatchFails) {
  Patch p = gaussian_patch(0.0, 0.0, 1.0);
  for (auto& row : p.values) row.fill(1.0);
  EXPECT_FALSE(localize_radial_symmetry(p).has_value());
}

TEST(LocalizerProperties, TranslationByWholePixel) {
  const auto base = blob_image(24, 24, {{10.3, 11.6, 1.0}}, 1.0);
  BfImage moved = base;
  moved.values = Raster<double>(24, 24);
  for (std::size_t r = 0; r + 1 < 24; ++r)
    for (std::size_t c = 0; c + 1 < 24; ++c) moved.values(r + 1, c + 1) = base.values(r, c);
  for (Localizer m : kAllLocalizers) {
    const auto a = localize_frame(base, 0, m, {});
    const auto b = localize_frame(moved, 0, m, {});
    ASSERT_EQ(a.size(), 1u) << to_string(m);
    ASSERT_EQ(b.size(), 1u) << to_string(m);
    EXPECT_NEAR(b[0].x - a[0].x, 1.0, 1e-12) << to_string(m);
    EXPECT_NEAR(b[0].z - a[0].z, 1.0, 1e-12) << to_string(m);
  }
}

TEST(LocalizerProperties, IntensityScaleInvariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> off(-0.45, 0.45), sig(0.7, 1.5);
  for (int t = 0; t < 20; ++t) {
    const auto p = gaussian_patch(off(rng), off(rng), sig(rng), 1.0, 0.02);
    for (double k : {0.001, 3.0, 2048.0}) {
      Patch q = p;
      for (auto& row : q.values)
        for (double& v : row) v *= k;
      for (Localizer m : kAllLocalizers) {
        const auto a = run(p, m), b = run(q, m);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (!a) continue;
        const double tol = m == Localizer::GaussFit ? 1e-6 : 1e-12;
        EXPECT_NEAR(a->x, b->x, tol) << to_string(m);
        EXPECT_NEAR(a->z, b->z, tol) << to_string(m);
      }
    }
  }
}

TEST(LocalizerProperties, OffsetsStayInsidePatch) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    Patch p = gaussian_patch(0.0, 0.0, 1.0);
    for (auto& row : p.values)
      for (double& v : row) v = u(rng);
    p.values[2][2] = 1.0;
    for (Localizer m : kAllLocalizers) {
      const auto d = run(p, m);
      if (!d) continue;
      EXPECT_LE(std::abs(d->x), 2.0);
      EXPECT_LE(std::abs(d->z), 2.0);
    }
  }
}

TEST(LocalizerProperties, RadialSymmetryAgreesWithGaussFit) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> off(-0.5, 0.5), sig(0.8, 1.4);
  for (int t = 0; t < 30; ++t) {
    const auto p = gaussian_patch(off(rng), off(rng), sig(rng));
    const auto rs = localize_radial_symmetry(p);
    const auto gf = localize_gauss_fit(p);
    ASSERT_TRUE(rs && gf);
    EXPECT_NEAR(rs->x, gf->x, 0.05);
    EXPECT_NEAR(rs->z, gf->z, 0.05);
  }
}

TEST(LocalizerProperties, ParseNamesRoundTrip) {
  for (Localizer m : kAllLocalizers) EXPECT_EQ(parse_localizer(to_string(m)), m);
  EXPECT_FALSE(parse_localizer("Centroid").has_value());
}

class FrameLocalization : public ::testing::TestWithParam<Beamformer> {};

PipelineConfig small_field() {
  auto cfg = PipelineConfig::defaults();
  cfg.grid.x_min = -1.0e-3;
  cfg.grid.x_max = 1.0e-3;
  cfg.grid.z_min = 9.0e-3;
  cfg.grid.z_max = 11.0e-3;
  return cfg;
}

std::vector<Detection> detections_for(const std::vector<Point>& targets, Beamformer bf, Localizer m) {
  const auto cfg = small_field();
  const auto frame = simulate_scatterers(targets, cfg.probe, record_length(cfg.phantom, cfg.probe),
                                         cfg.phantom.pulse_cycles);
  const auto img = decimate_axial(envelope(beamform_frame(frame, cfg, bf)), cfg.grid.axial_oversample);
  return localize_frame(img, 0, m, cfg.detector, cfg.localizer);
}

TEST_P(FrameLocalization, OnePointTarget) {
  const auto cfg = small_field();
  const auto grid = localization_grid(cfg);
  const double lambda = cfg.wavelength();
  const Point target{grid.x(10), grid.z(10)};
  for (Localizer m : kAllLocalizers) {
    const auto d = detections_for({target}, GetParam(), m);
    ASSERT_EQ(d.size(), 1u) << to_string(m);
    EXPECT_LE(std::abs(d[0].x - target.x), 0.1 * lambda) << to_string(m);
    EXPECT_LE(std::abs(d[0].z - target.z), 0.1 * lambda) << to_string(m);
  }
}

void expect_matched(const std::vector<Point>& targets, Beamformer bf, double tol, double wa_tol) {
  for (Localizer m : kAllLocalizers) {
    const double limit = m == Localizer::WA ? wa_tol : tol;
    const auto d = detections_for(targets, bf, m);
    ASSERT_EQ(d.size(), targets.size()) << to_string(m);
    for (const auto& t : targets) {
      double best = 1e9;
      for (const auto& x : d) best = std::min(best, std::hypot(x.x - t.x, x.z - t.z));
      EXPECT_LE(best, limit) << to_string(m);
    }
  }
}

TEST_P(FrameLocalization, TwoTargetsThreeWavelengthsApartAxially) {
  const auto cfg = small_field();
  const auto grid = localization_grid(cfg);
  // WA reads a single 5-sample line, so the neighbour's tail inside the crop
  // shifts it more than the model-based estimators.
  expect_matched({{grid.x(10), grid.z(7)}, {grid.x(10), grid.z(10)}}, GetParam(), 0.1 * cfg.wavelength(),
                 0.15 * cfg.wavelength());
}

// Side by side the main lobes overlap inside the 5x5 crop, which pulls each
// estimate toward its neighbour.
TEST_P(FrameLocalization, TwoTargetsThreeWavelengthsApartLaterally) {
  const auto cfg = small_field();
  const auto grid = localization_grid(cfg);
  expect_matched({{grid.x(7), grid.z(10)}, {grid.x(10), grid.z(10)}}, GetParam(), 0.5 * cfg.wavelength(),
                 0.5 * cfg.wavelength());
}

INSTANTIATE_TEST_SUITE_P(Beamformers, FrameLocalization, ::testing::Values(Beamformer::DAS, Beamformer::FDMAS),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(FrameLocalization, EmptyImage) {
  BfImage img = blob_image(10, 10, {});
  for (Localizer m : kAllLocalizers) EXPECT_TRUE(localize_frame(img, 0, m, {}).empty());
}

}  // namespace
}  // namespace ulm
