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

#include "ulm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ulm {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t parse_uint(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
}

std::string format_region(const std::optional<Region>& r) {
  if (!r) return "none";
  return format_double(r->x_min) + "," + format_double(r->x_max) + "," + format_double(r->z_min) + "," +
         format_double(r->z_max);
}

std::optional<Region> parse_region(std::string_view v) {
  if (v == "none") return std::nullopt;
  const auto parts = split(v, ',');
  if (parts.size() != 4) throw std::invalid_argument("region needs x_min,x_max,z_min,z_max");
  return Region{parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]), parse_double(parts[3])};
}

std::string format_points(const std::vector<Point>& points) {
  std::string out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k) out += ';';
    out += format_double(points[k].x) + ":" + format_double(points[k].z);
  }
  return out;
}

std::vector<Point> parse_points(std::string_view v) {
  std::vector<Point> out;
  for (std::string_view item : split(v, ';')) {
    const auto xz = split(item, ':');
    if (xz.size() != 2) throw std::invalid_argument("control points are x:z pairs separated by ';'");
    out.push_back({parse_double(xz[0]), parse_double(xz[1])});
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view)> set;
};

template <typename T>
Field double_field(std::string key, T PipelineConfig::*section, double T::*member) {
  return {std::move(key),
          [=](const PipelineConfig& c) { return format_double(c.*section.*member); },
          [=](PipelineConfig& c, std::string_view v) { c.*section.*member = parse_double(v); }};
}

template <typename T, typename U>
Field uint_field(std::string key, T PipelineConfig::*section, U T::*member) {
  return {std::move(key),
          [=](const PipelineConfig& c) { return std::to_string(c.*section.*member); },
          [=](PipelineConfig& c, std::string_view v) { c.*section.*member = static_cast<U>(parse_uint(v)); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using C = PipelineConfig;
    std::vector<Field> f;
    f.push_back(uint_field("probe.n_elements", &C::probe, &Probe::n_elements));
    f.push_back(double_field("probe.pitch", &C::probe, &Probe::pitch));
    f.push_back(double_field("probe.fc", &C::probe, &Probe::fc));
    f.push_back(double_field("probe.fs", &C::probe, &Probe::fs));
    f.push_back(double_field("probe.c", &C::probe, &Probe::c));
    f.push_back(double_field("probe.frame_rate", &C::probe, &Probe::frame_rate));

    f.push_back(uint_field("phantom.bubbles_per_frame", &C::phantom, &PhantomSpec::bubbles_per_frame));
    f.push_back(uint_field("phantom.n_frames", &C::phantom, &PhantomSpec::n_frames));
    f.push_back({"phantom.noise_db",
                 [](const C& c) { return c.phantom.noise_db ? format_double(*c.phantom.noise_db) : "off"; },
                 [](C& c, std::string_view v) {
                   c.phantom.noise_db = v == "off" ? std::nullopt : std::optional<double>(parse_double(v));
                 }});
    f.push_back(double_field("phantom.z_min", &C::phantom, &PhantomSpec::z_min));
    f.push_back(uint_field("phantom.pulse_cycles", &C::phantom, &PhantomSpec::pulse_cycles));
    f.push_back(uint_field("rng_seed", &C::phantom, &PhantomSpec::rng_seed));

    f.push_back(double_field("grid.x_min", &C::grid, &GridSettings::x_min));
    f.push_back(double_field("grid.x_max", &C::grid, &GridSettings::x_max));
    f.push_back(double_field("grid.z_min", &C::grid, &GridSettings::z_min));
    f.push_back(double_field("grid.z_max", &C::grid, &GridSettings::z_max));
    f.push_back(double_field("grid.pitch_lambda", &C::grid, &GridSettings::pitch_lambda));
    f.push_back(uint_field("grid.axial_oversample", &C::grid, &GridSettings::axial_oversample));

    f.push_back({"apodization.kind",
                 [](const C& c) { return std::string(c.apodization.kind == ApodKind::hann ? "hann" : "rect"); },
                 [](C& c, std::string_view v) {
                   if (v == "hann") c.apodization.kind = ApodKind::hann;
                   else if (v == "rect") c.apodization.kind = ApodKind::rect;
                   else throw std::invalid_argument("apodization.kind is hann or rect");
                 }});
    f.push_back(double_field("apodization.f_number", &C::apodization, &Apodization::f_number));

    f.push_back(double_field("bandpass.center", &C::bandpass, &BandpassSpec::center));
    f.push_back(double_field("bandpass.fractional_bandwidth", &C::bandpass, &BandpassSpec::fractional_bandwidth));
    f.push_back(uint_field("bandpass.n_taps", &C::bandpass, &BandpassSpec::n_taps));

    f.push_back(uint_field("detector.max_count", &C::detector, &DetectorParams::max_count));
    f.push_back(uint_field("detector.min_separation_px", &C::detector, &DetectorParams::min_separation_px));
    f.push_back(double_field("detector.threshold_rel", &C::detector, &DetectorParams::threshold_rel));

    f.push_back({"localizer.wa_lines",
                 [](const C& c) { return std::string(c.localizer.wa_lines == WaLines::matched ? "matched" : "literal"); },
                 [](C& c, std::string_view v) {
                   if (v == "matched") c.localizer.wa_lines = WaLines::matched;
                   else if (v == "literal") c.localizer.wa_lines = WaLines::literal;
                   else throw std::invalid_argument("localizer.wa_lines is matched or literal");
                 }});

    f.push_back(double_field("tracker.max_link_distance", &C::tracker, &TrackerParams::max_link_distance));
    f.push_back(uint_field("tracker.max_gap", &C::tracker, &TrackerParams::max_gap));
    f.push_back(uint_field("tracker.min_track_length", &C::tracker, &TrackerParams::min_track_length));

    f.push_back(uint_field("clutter.cut_low", &C::clutter, &ClutterSettings::cut_low));
    f.push_back(uint_field("clutter.cut_high", &C::clutter, &ClutterSettings::cut_high));
    f.push_back({"clutter.before_localization",
                 [](const C& c) { return std::string(c.clutter.before_localization ? "true" : "false"); },
                 [](C& c, std::string_view v) { c.clutter.before_localization = parse_bool(v); }});

    f.push_back({"metrics.contrast_mode",
                 [](const C& c) { return std::string(c.metrics.contrast_mode == ContrastMode::masked ? "masked" : "full"); },
                 [](C& c, std::string_view v) {
                   if (v == "masked") c.metrics.contrast_mode = ContrastMode::masked;
                   else if (v == "full") c.metrics.contrast_mode = ContrastMode::full;
                   else throw std::invalid_argument("metrics.contrast_mode is masked or full");
                 }});
    f.push_back({"metrics.region", [](const C& c) { return format_region(c.metrics.region); },
                 [](C& c, std::string_view v) { c.metrics.region = parse_region(v); }});
    f.push_back(double_field("metrics.map_pitch_lambda", &C::metrics, &MetricSettings::map_pitch_lambda));

    f.push_back({"run.beamformers",
                 [](const C& c) {
                   std::string out;
                   for (std::size_t k = 0; k < c.beamformers.size(); ++k)
                     out += (k ? "," : "") + std::string(to_string(c.beamformers[k]));
                   return out;
                 },
                 [](C& c, std::string_view v) {
                   c.beamformers.clear();
                   for (std::string_view name : split(v, ',')) {
                     if (name == "DAS") c.beamformers.push_back(Beamformer::DAS);
                     else if (name == "FDMAS") c.beamformers.push_back(Beamformer::FDMAS);
                     else if (name == "both") c.beamformers = {Beamformer::DAS, Beamformer::FDMAS};
                     else throw std::invalid_argument("unknown beamformer '" + std::string(name) + "'");
                   }
                 }});
    f.push_back({"run.localizers",
                 [](const C& c) {
                   std::string out;
                   for (std::size_t k = 0; k < c.localizers.size(); ++k)
                     out += (k ? "," : "") + std::string(to_string(c.localizers[k]));
                   return out;
                 },
                 [](C& c, std::string_view v) {
                   c.localizers.clear();
                   for (std::string_view name : split(v, ',')) {
                     const auto m = parse_localizer(name);
                     if (!m) throw std::invalid_argument("unknown localizer '" + std::string(name) + "'");
                     c.localizers.push_back(*m);
                   }
                 }});
    f.push_back({"run.output_dir", [](const C& c) { return c.output_dir; },
                 [](C& c, std::string_view v) { c.output_dir = std::string(v); }});
    f.push_back({"run.bmode_dynamic_range_db", [](const C& c) { return format_double(c.bmode_dynamic_range_db); },
                 [](C& c, std::string_view v) { c.bmode_dynamic_range_db = parse_double(v); }});
    return f;
  }();
  return table;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return {buf, ptr};
}

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.phantom = default_phantom(c.probe);
  const double lambda = c.probe.wavelength();
  // Twin vertical canals of the bundled phantom, clear of their ends.
  const double twin_x = 0.5 * (c.phantom.canals[0].points[0].x + c.phantom.canals[1].points[0].x);
  c.metrics.region = Region{twin_x - 1.5 * lambda, twin_x + 1.5 * lambda, 9.3e-3, 10.7e-3};
  return c;
}

double PipelineConfig::max_link_distance() const {
  if (tracker.max_link_distance > 0.0) return tracker.max_link_distance;
  double fastest = 0.0;
  for (const Canal& canal : phantom.canals) fastest = std::max(fastest, canal.speed);
  const double step = fastest / probe.frame_rate;
  return step > 0.0 ? 2.0 * step : 0.5 * probe.wavelength();
}

void PipelineConfig::validate() const {
  probe.validate();
  phantom.validate(probe);
  if (!(grid.x_max > grid.x_min) || !(grid.z_max > grid.z_min))
    throw std::invalid_argument("grid: bounds must satisfy min < max");
  if (!(grid.z_min > 0.0)) throw std::invalid_argument("grid: z_min must be > 0");
  if (!(grid.pitch_lambda > 0.0)) throw std::invalid_argument("grid: pitch_lambda must be > 0");
  if (grid.axial_oversample < 1) throw std::invalid_argument("grid: axial_oversample must be >= 1");
  if (!(apodization.f_number > 0.0)) throw std::invalid_argument("apodization: f_number must be > 0");
  if (bandpass.n_taps < 3 || bandpass.n_taps % 2 == 0)
    throw std::invalid_argument("bandpass: n_taps must be odd and >= 3");
  if (detector.max_count < 1) throw std::invalid_argument("detector: max_count must be >= 1");
  if (!(detector.threshold_rel >= 0.0 && detector.threshold_rel <= 1.0))
    throw std::invalid_argument("detector: threshold_rel must lie in [0, 1]");
  if (!(tracker.max_link_distance >= 0.0)) throw std::invalid_argument("tracker: max_link_distance must be >= 0");
  if (!(metrics.map_pitch_lambda > 0.0)) throw std::invalid_argument("metrics: map_pitch_lambda must be > 0");
  if (beamformers.empty()) throw std::invalid_argument("run: no beamformer selected");
  if (localizers.empty()) throw std::invalid_argument("run: no localizer selected");
  if (output_dir.empty()) throw std::invalid_argument("run: output_dir must not be empty");
  if (!(bmode_dynamic_range_db > 0.0)) throw std::invalid_argument("run: bmode_dynamic_range_db must be > 0");
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config = PipelineConfig::defaults();
  std::map<std::size_t, Canal> canals;
  std::optional<std::size_t> canal_count;

  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "phantom.canals") {
        canal_count = parse_uint(value);
        continue;
      }
      if (key.rfind("phantom.canal.", 0) == 0) {
        const auto rest = std::string_view(key).substr(14);
        const auto dot = rest.find('.');
        if (dot == std::string_view::npos) throw std::invalid_argument("unknown key");
        const auto index = static_cast<std::size_t>(parse_uint(rest.substr(0, dot)));
        const auto member = rest.substr(dot + 1);
        Canal& canal = canals[index];
        if (member == "points") canal.points = parse_points(value);
        else if (member == "diameter") canal.diameter = parse_double(value);
        else if (member == "speed") canal.speed = parse_double(value);
        else throw std::invalid_argument("unknown key");
        continue;
      }
      const auto& table = fields();
      const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
      if (it == table.end()) throw std::invalid_argument("unknown key");
      it->set(config, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + " (" + key + "): " + e.what());
    }
  }

  if (canal_count || !canals.empty()) {
    const std::size_t n = canal_count.value_or(canals.size());
    config.phantom.canals.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const auto it = canals.find(k);
      if (it == canals.end()) throw std::invalid_argument("config: canal " + std::to_string(k) + " is missing");
      config.phantom.canals.push_back(it->second);
    }
    if (!canals.empty() && canals.rbegin()->first >= n)
      throw std::invalid_argument("config: canal index beyond phantom.canals");
  }
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const PipelineConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key + " = " + f.get(config) + "\n";
    if (f.key == "phantom.pulse_cycles") {
      out += "phantom.canals = " + std::to_string(config.phantom.canals.size()) + "\n";
      for (std::size_t k = 0; k < config.phantom.canals.size(); ++k) {
        const Canal& canal = config.phantom.canals[k];
        const std::string prefix = "phantom.canal." + std::to_string(k) + ".";
        out += prefix + "points = " + format_points(canal.points) + "\n";
        out += prefix + "diameter = " + format_double(canal.diameter) + "\n";
        out += prefix + "speed = " + format_double(canal.speed) + "\n";
      }
    }
  }
  return out;
}

}  // namespace ulm
