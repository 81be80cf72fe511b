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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "ulm/config.hpp"
#include "ulm/io.hpp"

namespace ulm {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("ulm_test_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

std::vector<RfFrame> random_frames(std::size_t n_frames, std::size_t n_samples, std::size_t n_channels) {
  std::mt19937_64 rng(11);
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<RfFrame> frames(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    frames[f].frame_index = f;
    frames[f].t0 = 3.25e-6;
    frames[f].probe.n_elements = n_channels;
    frames[f].samples = Raster<float>(n_samples, n_channels);
    for (float& v : frames[f].samples.data()) v = n(rng);
  }
  frames[0].samples(0, 0) = -0.0f;
  frames[0].samples(1, 0) = 1e-40f;
  return frames;
}

TEST(Config, DefaultsRoundTrip) {
  const auto config = PipelineConfig::defaults();
  EXPECT_NO_THROW(config.validate());
  EXPECT_EQ(parse_config(serialize_config(config)), config);
}

TEST(Config, ModifiedRoundTrip) {
  auto config = PipelineConfig::defaults();
  config.probe.fc = 7.8125e6;
  config.phantom.noise_db.reset();
  config.phantom.canals.resize(1);
  config.phantom.canals[0].speed = 0.1 / 3.0;
  config.grid.pitch_lambda = 0.7;
  config.apodization.kind = ApodKind::rect;
  config.localizer.wa_lines = WaLines::literal;
  config.clutter.before_localization = true;
  config.metrics.contrast_mode = ContrastMode::full;
  config.metrics.region.reset();
  config.beamformers = {Beamformer::FDMAS};
  config.localizers = {Localizer::GaussFit, Localizer::RS};
  config.output_dir = "elsewhere";
  EXPECT_EQ(parse_config(serialize_config(config)), config);
}

TEST(Config, PartialFileKeepsDefaults) {
  const auto config = parse_config("# comment\n\nphantom.n_frames = 12   # trailing\nrun.localizers = WA\n");
  auto expected = PipelineConfig::defaults();
  expected.phantom.n_frames = 12;
  expected.localizers = {Localizer::WA};
  EXPECT_EQ(config, expected);
}

TEST(Config, UnknownKeyAndBadValuesRejected) {
  EXPECT_THROW(parse_config("probe.colour = 3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("nonsense\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("probe.fc = fast\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("phantom.n_frames = -1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("run.beamformers = DAS,MV\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("apodization.kind = tukey\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("phantom.canals = 2\nphantom.canal.0.speed = 0.01\n"), std::invalid_argument);
}

TEST(Config, ValidationNamesSetting) {
  auto config = PipelineConfig::defaults();
  config.bandpass.n_taps = 64;
  try {
    config.validate();
    FAIL() << "even tap count accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("n_taps"), std::string::npos);
  }
}

TEST(Config, FormatDoubleIsShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1540.0), "1540");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, k % 20 - 10);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Container, RoundTripIsBitExact) {
  TempDir dir;
  const auto frames = random_frames(3, 17, 5);
  const auto path = dir.file("a.ulmf");
  write_container(path, frames);
  EXPECT_EQ(fs::file_size(path), kContainerHeaderBytes + 3 * 17 * 5 * sizeof(float));
  const auto header = read_container_header(path);
  EXPECT_EQ(header.n_frames, 3u);
  EXPECT_EQ(header.n_samples, 17u);
  EXPECT_EQ(header.n_channels, 5u);
  EXPECT_EQ(header.t0, 3.25e-6);
  EXPECT_EQ(header.probe, frames[0].probe);
  const auto back = read_container(path);
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    EXPECT_EQ(back[f].frame_index, f);
    EXPECT_EQ(back[f].t0, frames[f].t0);
    ASSERT_EQ(back[f].samples.size(), frames[f].samples.size());
    EXPECT_EQ(std::memcmp(back[f].samples.data().data(), frames[f].samples.data().data(),
                          frames[f].samples.size() * sizeof(float)),
              0);
  }
  write_container(dir.file("b.ulmf"), back);
  EXPECT_EQ(slurp(path), slurp(dir.file("b.ulmf")));
}

TEST(Container, CorruptionDetected) {
  TempDir dir;
  const auto path = dir.file("c.ulmf");
  write_container(path, random_frames(2, 8, 4));
  const std::string good = slurp(path);

  auto bad = good;
  bad[0] = 'X';
  spit(path, bad);
  EXPECT_THROW(read_container(path), std::runtime_error);

  bad = good;
  bad[4] = 9;
  spit(path, bad);
  EXPECT_THROW(read_container_header(path), std::runtime_error);

  spit(path, good.substr(0, good.size() - 3));
  EXPECT_THROW(read_container(path), std::runtime_error);

  spit(path, good + "x");
  EXPECT_THROW(read_container(path), std::runtime_error);

  spit(path, good.substr(0, 10));
  EXPECT_THROW(read_container_header(path), std::runtime_error);

  EXPECT_THROW(read_container(dir.file("missing.ulmf")), std::runtime_error);
}

TEST(Container, MismatchedFramesRejected) {
  TempDir dir;
  auto frames = random_frames(2, 8, 4);
  frames[1].samples = Raster<float>(9, 4);
  EXPECT_THROW(write_container(dir.file("m.ulmf"), frames), std::invalid_argument);
  EXPECT_THROW(write_container(dir.file("e.ulmf"), std::vector<RfFrame>{}), std::invalid_argument);
}

TEST(Raster, RoundTripByAnyName) {
  TempDir dir;
  const auto grid = BeamGrid::span(-1e-3, 1e-3, 9e-3, 10e-3, 2.5e-4);
  Raster<double> values(grid.nz, grid.nx);
  for (std::size_t k = 0; k < values.size(); ++k) values.data()[k] = 0.5 * static_cast<double>(k);
  const auto stem = dir.file("map");
  write_raster(stem, values, grid, "density");
  for (const auto& name : {stem, stem + ".f32", stem + ".txt"}) {
    const auto r = read_raster(name);
    EXPECT_EQ(r.kind, "density");
    EXPECT_EQ(r.grid, grid);
    EXPECT_TRUE(std::equal(r.values.data().begin(), r.values.data().end(), values.data().begin(), values.data().end()));
  }
  spit(stem + ".f32", slurp(stem + ".f32").substr(4));
  EXPECT_THROW(read_raster(stem), std::runtime_error);
}

TEST(MetricsCsv, HeaderAndRow) {
  EXPECT_EQ(metrics_csv_header(), "beamformer,localizer,local_contrast_mean,local_contrast_std,lateral_spread_lambda");
  const MetricReport r{"FDMAS", "RS", 0.25, 0.125, std::nan("")};
  EXPECT_EQ(metrics_csv_row(r), "FDMAS,RS,0.25,0.125,nan");
}

}  // namespace
}  // namespace ulm
