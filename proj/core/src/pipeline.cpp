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

#include "ulm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "ulm/io.hpp"
#include "ulm/parallel.hpp"

namespace ulm {
namespace {

void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

BeamGrid localization_grid(const PipelineConfig& config) {
  const double pitch = config.grid.pitch_lambda * config.wavelength();
  return BeamGrid::span(config.grid.x_min, config.grid.x_max, config.grid.z_min, config.grid.z_max, pitch);
}

BeamGrid beamforming_grid(const PipelineConfig& config) {
  return localization_grid(config).refined_axial(config.grid.axial_oversample);
}

BeamGrid map_grid(const PipelineConfig& config) {
  return super_res_grid(localization_grid(config), config.metrics.map_pitch_lambda * config.wavelength());
}

std::vector<RfFrame> simulate_acquisition(const PipelineConfig& config) {
  config.validate();
  std::vector<RfFrame> frames(config.phantom.n_frames);
  parallel_for(frames.size(), [&](std::size_t f) { frames[f] = simulate_frame(config.phantom, config.probe, f); });
  return frames;
}

BfImage beamform_frame(const RfFrame& frame, const PipelineConfig& config, Beamformer beamformer) {
  const BeamGrid grid = beamforming_grid(config);
  return beamformer == Beamformer::DAS ? das_image(frame, grid, config.apodization)
                                       : fdmas_image(frame, grid, config.apodization, config.bandpass);
}

BeamformerProducts beamform_stack(std::span<const RfFrame> frames, const PipelineConfig& config,
                                  Beamformer beamformer, std::vector<std::string>* warnings) {
  if (frames.empty()) throw std::invalid_argument("beamform_stack: no frames");
  BeamformerProducts out;
  out.beamformer = beamformer;

  ImageStack rf;
  rf.frames.resize(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) rf.frames[f] = beamform_frame(frames[f], config, beamformer);

  const std::size_t rank_bound = std::min(rf.n_pixels(), rf.frames.size());
  const bool can_filter = rf.frames.size() >= 2 && config.clutter.cut_low + config.clutter.cut_high < rank_bound;
  std::optional<ImageStack> filtered;
  if (can_filter) {
    filtered = svd_filter(rf, config.clutter.cut_low, config.clutter.cut_high);
    out.power_doppler = power_doppler(*filtered);
  } else {
    warn(warnings, std::string(to_string(beamformer)) +
                       ": clutter filter skipped (needs >= 2 frames and cut_low + cut_high below the stack rank)");
  }

  const ImageStack& source = config.clutter.before_localization && filtered ? *filtered : rf;
  out.envelopes.resize(source.frames.size());
  parallel_for(source.frames.size(), [&](std::size_t f) {
    out.envelopes[f] = decimate_axial(envelope(source.frames[f]), config.grid.axial_oversample);
  });

  const BfImage first_envelope = envelope(rf.frames.front());
  bool any_signal = false;
  for (double v : first_envelope.values.data()) any_signal = any_signal || v > 0.0;
  if (any_signal) {
    out.bmode = log_compress(first_envelope, config.bmode_dynamic_range_db);
  } else {
    out.bmode = first_envelope;
    out.bmode.kind = ImageKind::bmode_db;
    for (double& v : out.bmode.values.data()) v = -config.bmode_dynamic_range_db;
  }
  return out;
}

MetricReport evaluate_map(const Raster<double>& map, const BeamGrid& grid, const MetricSettings& settings,
                          double lambda, std::string beamformer, std::string localizer,
                          std::vector<std::string>* warnings) {
  MetricReport report{std::move(beamformer), std::move(localizer), kNaN, kNaN, kNaN};
  const std::string label = report.beamformer + "/" + report.localizer;
  const bool empty = std::none_of(map.data().begin(), map.data().end(), [](double v) { return v > 0.0; });
  if (empty) {
    warn(warnings, label + ": empty map, metrics not computed");
    return report;
  }
  const ContrastScore contrast = local_contrast_score(map, settings.contrast_mode);
  report.local_contrast_mean = contrast.mean;
  report.local_contrast_std = contrast.std;
  if (settings.region) {
    try {
      report.lateral_spread_lambda = lateral_spread_score(map, grid, *settings.region, lambda).spread_lambda;
    } catch (const std::invalid_argument& e) {
      warn(warnings, label + ": lateral spread not computed: " + e.what());
    }
  }
  return report;
}

CombinationResult localize_and_track(const BeamformerProducts& products, const PipelineConfig& config,
                                     Localizer localizer, std::vector<std::string>* warnings) {
  CombinationResult out;
  out.beamformer = products.beamformer;
  out.localizer = localizer;

  std::vector<std::vector<Detection>> per_frame(products.envelopes.size());
  parallel_for(per_frame.size(), [&](std::size_t f) {
    per_frame[f] = localize_frame(products.envelopes[f], f, localizer, config.detector, config.localizer);
  });
  for (auto& frame : per_frame) out.detections.insert(out.detections.end(), frame.begin(), frame.end());

  const std::string label = std::string(to_string(products.beamformer)) + "/" + to_string(localizer);
  if (out.detections.empty()) warn(warnings, label + ": no detections");

  TrackerParams tracker = config.tracker;
  tracker.max_link_distance = config.max_link_distance();
  out.tracks = link_detections(out.detections, tracker, config.probe.frame_rate);

  const BeamGrid grid = map_grid(config);
  const double step = config.metrics.map_pitch_lambda * config.wavelength();
  out.density = render_density(out.tracks, grid, step);
  out.velocity = render_velocity(out.tracks, grid, step);
  out.report = evaluate_map(out.density.values, grid, config.metrics, config.wavelength(),
                            to_string(products.beamformer), to_string(localizer), warnings);
  return out;
}

std::vector<Track> ground_truth_tracks(const PipelineConfig& config) {
  std::map<std::pair<std::size_t, std::uint64_t>, std::size_t> index;
  std::vector<Track> tracks;
  for (std::size_t f = 0; f < config.phantom.n_frames; ++f) {
    for (const Bubble& b : advance_bubbles(config.phantom, config.probe.frame_rate, f)) {
      const auto key = std::pair{b.slot, b.pass};
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, tracks.size()).first;
        tracks.push_back({});
        tracks.back().id = it->second;
      }
      Detection d;
      d.x = b.position.x;
      d.z = b.position.z;
      d.intensity = 1.0;
      d.frame_index = f;
      tracks[it->second].detections.push_back(d);
    }
  }
  for (Track& t : tracks)
    if (t.detections.size() >= 2) t.velocities = velocities(t, config.probe.frame_rate);
  return tracks;
}

SuperResMap ground_truth_density(const PipelineConfig& config) {
  const auto tracks = ground_truth_tracks(config);
  return render_density(tracks, map_grid(config), config.metrics.map_pitch_lambda * config.wavelength());
}

PipelineResult run_pipeline(const PipelineConfig& config, std::span<const RfFrame> frames) {
  config.validate();
  if (frames.empty()) throw std::invalid_argument("run_pipeline: no frames");
  PipelineResult result;
  for (Beamformer bf : config.beamformers) {
    result.beamformed.push_back(beamform_stack(frames, config, bf, &result.warnings));
    for (Localizer loc : config.localizers)
      result.combinations.push_back(localize_and_track(result.beamformed.back(), config, loc, &result.warnings));
  }
  result.ground_truth = ground_truth_density(config);
  return result;
}

void write_outputs(const PipelineResult& result, const PipelineConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };

  {
    std::ofstream out(path("config.txt"));
    out << serialize_config(config);
    if (!out) throw std::runtime_error("cannot write '" + path("config.txt") + "'");
  }

  for (const BeamformerProducts& p : result.beamformed) {
    const std::string bf = to_string(p.beamformer);
    write_raster(path("bmode_" + bf), p.bmode.values, p.bmode.grid, "bmode_db");
    write_pgm(path("bmode_" + bf + ".pgm"), p.bmode.values, -config.bmode_dynamic_range_db, 0.0);
    if (p.power_doppler) {
      write_raster(path("power_doppler_" + bf), p.power_doppler->db, p.power_doppler->grid, "power_doppler_db");
      write_pgm(path("power_doppler_" + bf + ".pgm"), p.power_doppler->db, -60.0, 0.0);
    }
  }

  std::vector<MetricReport> reports;
  for (const CombinationResult& c : result.combinations) {
    const std::string tag = std::string(to_string(c.beamformer)) + "_" + to_string(c.localizer);
    double peak = 0.0;
    for (double v : c.density.values.data()) peak = std::max(peak, v);
    write_raster(path("density_" + tag), c.density.values, c.density.grid, "density");
    write_pgm(path("density_" + tag + ".pgm"), c.density.values, 0.0, peak);
    write_raster(path("velocity_" + tag), c.velocity.values, c.velocity.grid, "velocity_norm");
    write_pgm(path("velocity_" + tag + ".pgm"), c.velocity.values, 0.0, 1.0);
    write_detections_csv(path("detections_" + tag + ".csv"), c.detections);
    write_tracks_csv(path("tracks_" + tag + ".csv"), c.tracks);
    reports.push_back(c.report);
  }
  write_metrics_csv(path("metrics.csv"), reports);

  double gt_peak = 0.0;
  for (double v : result.ground_truth.values.data()) gt_peak = std::max(gt_peak, v);
  write_raster(path("ground_truth_density"), result.ground_truth.values, result.ground_truth.grid, "density");
  write_pgm(path("ground_truth_density.pgm"), result.ground_truth.values, 0.0, gt_peak);
}

std::vector<double> mean_lateral_profile(const Raster<double>& map, const BeamGrid& grid, const Region& region) {
  std::vector<double> profile;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < grid.nx; ++c)
    if (grid.x(c) >= region.x_min && grid.x(c) <= region.x_max) cols.push_back(c);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < grid.nz; ++r)
    if (grid.z(r) >= region.z_min && grid.z(r) <= region.z_max) rows.push_back(r);
  if (cols.empty() || rows.empty()) throw std::invalid_argument("mean_lateral_profile: region holds no bins");
  profile.assign(cols.size(), 0.0);
  for (std::size_t r : rows)
    for (std::size_t k = 0; k < cols.size(); ++k) profile[k] += map(r, cols[k]);
  for (double& v : profile) v /= static_cast<double>(rows.size());
  return profile;
}

std::vector<std::size_t> distinct_peaks(std::span<const double> profile, std::size_t min_separation,
                                        double rel_height, double valley_ratio) {
  std::vector<std::size_t> peaks;
  if (profile.empty()) return peaks;
  const double top = *std::max_element(profile.begin(), profile.end());
  if (!(top > 0.0)) return peaks;
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const double left = k > 0 ? profile[k - 1] : -1.0;
    const double right = k + 1 < profile.size() ? profile[k + 1] : -1.0;
    if (profile[k] >= rel_height * top && profile[k] > left && profile[k] >= right) candidates.push_back(k);
  }
  // Tallest first; a weaker peak survives only if separated from every kept
  // peak by distance and by a dip.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return profile[a] > profile[b]; });
  for (std::size_t cand : candidates) {
    const bool distinct = std::all_of(peaks.begin(), peaks.end(), [&](std::size_t kept) {
      const std::size_t lo = std::min(cand, kept);
      const std::size_t hi = std::max(cand, kept);
      if (hi - lo < min_separation) return false;
      const double valley = *std::min_element(profile.begin() + static_cast<std::ptrdiff_t>(lo),
                                              profile.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
      return valley < valley_ratio * std::min(profile[cand], profile[kept]);
    });
    if (distinct) peaks.push_back(cand);
  }
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

}  // namespace ulm
