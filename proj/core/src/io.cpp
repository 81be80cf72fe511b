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

#include "ulm/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ulm/config.hpp"

namespace ulm {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  const auto bits = std::bit_cast<U>(value);
  for (std::size_t k = 0; k < sizeof(T); ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  U bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) bits |= static_cast<U>(U{p[k]} << (8 * k));
  return std::bit_cast<T>(bits);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ContainerHeader parse_header(const std::string& bytes, const std::string& path) {
  if (bytes.size() < kContainerHeaderBytes) throw std::runtime_error("corrupt container '" + path + "': truncated header");
  if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
    throw std::runtime_error("corrupt container '" + path + "': bad magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 4;
  ContainerHeader h;
  h.version = get_le<std::uint16_t>(p);
  if (h.version != kContainerVersion)
    throw std::runtime_error("unsupported container version " + std::to_string(h.version) + " in '" + path + "'");
  p += 2;
  h.n_frames = get_le<std::uint32_t>(p);
  h.n_samples = get_le<std::uint32_t>(p + 4);
  h.n_channels = get_le<std::uint32_t>(p + 8);
  p += 12;
  h.probe.n_elements = h.n_channels;
  h.probe.pitch = get_le<double>(p);
  h.probe.fc = get_le<double>(p + 8);
  h.probe.fs = get_le<double>(p + 16);
  h.probe.c = get_le<double>(p + 24);
  h.probe.frame_rate = get_le<double>(p + 32);
  h.t0 = get_le<double>(p + 40);
  return h;
}

std::string raster_stem(const std::string& path) {
  for (const char* ext : {".f32", ".txt"}) {
    const std::string e(ext);
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
      return path.substr(0, path.size() - e.size());
  }
  return path;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

}  // namespace

void write_container(const std::string& path, std::span<const RfFrame> frames) {
  if (frames.empty()) throw std::invalid_argument("write_container: no frames");
  const RfFrame& first = frames.front();
  for (const RfFrame& f : frames) {
    if (f.n_samples() != first.n_samples() || f.n_channels() != first.n_channels() || !(f.probe == first.probe) ||
        f.t0 != first.t0)
      throw std::invalid_argument("write_container: frames disagree on shape or acquisition settings");
  }
  std::string header;
  header.append(kContainerMagic, 4);
  put_le(header, kContainerVersion);
  put_le(header, static_cast<std::uint32_t>(frames.size()));
  put_le(header, static_cast<std::uint32_t>(first.n_samples()));
  put_le(header, static_cast<std::uint32_t>(first.n_channels()));
  for (double v : {first.probe.pitch, first.probe.fc, first.probe.fs, first.probe.c, first.probe.frame_rate, first.t0})
    put_le(header, v);

  std::ofstream out = open_out(path);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::string payload;
  for (const RfFrame& f : frames) {
    payload.clear();
    payload.reserve(f.samples.size() * 4);
    for (float v : f.samples.data()) put_le(payload, v);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  finish(out, path);
}

ContainerHeader read_container_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string bytes(kContainerHeaderBytes, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  return parse_header(bytes, path);
}

std::vector<RfFrame> read_container(const std::string& path) {
  const std::string bytes = read_file(path);
  const ContainerHeader h = parse_header(bytes, path);
  if (bytes.size() - kContainerHeaderBytes != h.payload_bytes())
    throw std::runtime_error("corrupt container '" + path + "': payload length does not match header dims");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + kContainerHeaderBytes;
  std::vector<RfFrame> frames(h.n_frames);
  for (std::uint32_t f = 0; f < h.n_frames; ++f) {
    RfFrame& frame = frames[f];
    frame.samples = Raster<float>(h.n_samples, h.n_channels);
    for (float& v : frame.samples.data()) {
      v = get_le<float>(p);
      p += 4;
    }
    frame.frame_index = f;
    frame.probe = h.probe;
    frame.t0 = h.t0;
  }
  return frames;
}

void write_raster(const std::string& stem, const Raster<double>& values, const BeamGrid& grid,
                  const std::string& kind) {
  if (values.rows() != grid.nz || values.cols() != grid.nx)
    throw std::invalid_argument("write_raster: values do not match grid");
  std::string payload;
  payload.reserve(values.size() * 4);
  for (double v : values.data()) put_le(payload, static_cast<float>(v));
  {
    std::ofstream out = open_out(stem + ".f32");
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    finish(out, stem + ".f32");
  }
  std::ofstream side = open_out(stem + ".txt");
  side << "rows=" << grid.nz << "\ncols=" << grid.nx << "\npitch_x=" << format_double(grid.dx)
       << "\npitch_z=" << format_double(grid.dz) << "\nx0=" << format_double(grid.x0)
       << "\nz0=" << format_double(grid.z0) << "\nkind=" << kind << "\n";
  finish(side, stem + ".txt");
}

RasterFile read_raster(const std::string& path) {
  const std::string stem = raster_stem(path);
  const std::string sidecar = read_file(stem + ".txt");
  RasterFile out;
  std::istringstream lines(sidecar);
  std::string line;
  bool have_rows = false, have_cols = false;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "rows") out.grid.nz = std::stoul(value), have_rows = true;
      else if (key == "cols") out.grid.nx = std::stoul(value), have_cols = true;
      else if (key == "pitch_x") out.grid.dx = std::stod(value);
      else if (key == "pitch_z") out.grid.dz = std::stod(value);
      else if (key == "x0") out.grid.x0 = std::stod(value);
      else if (key == "z0") out.grid.z0 = std::stod(value);
      else if (key == "kind") out.kind = value;
    } catch (const std::exception&) {
      throw std::runtime_error("corrupt raster sidecar '" + stem + ".txt': bad value for " + key);
    }
  }
  if (!have_rows || !have_cols) throw std::runtime_error("corrupt raster sidecar '" + stem + ".txt': missing dims");
  const std::string payload = read_file(stem + ".f32");
  if (payload.size() != out.grid.nz * out.grid.nx * 4)
    throw std::runtime_error("corrupt raster '" + stem + ".f32': size does not match sidecar dims");
  out.values = Raster<double>(out.grid.nz, out.grid.nx);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (double& v : out.values.data()) {
    v = get_le<float>(p);
    p += 4;
  }
  return out;
}

void write_pgm(const std::string& path, const Raster<double>& values, double lo, double hi) {
  std::ofstream out = open_out(path);
  out << "P5\n" << values.cols() << " " << values.rows() << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  std::string pixels;
  pixels.reserve(values.size());
  for (double v : values.data()) {
    const double t = std::clamp((v - lo) / span, 0.0, 1.0);
    pixels.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  finish(out, path);
}

void write_detections_csv(const std::string& path, std::span<const Detection> detections) {
  std::ofstream out = open_out(path);
  out << "frame_index,x_m,z_m,intensity,method\n";
  for (const Detection& d : detections)
    out << d.frame_index << ',' << csv_number(d.x) << ',' << csv_number(d.z) << ',' << csv_number(d.intensity)
        << ',' << to_string(d.method) << '\n';
  finish(out, path);
}

void write_tracks_csv(const std::string& path, std::span<const Track> tracks) {
  std::ofstream out = open_out(path);
  out << "track_id,frame_index,x_m,z_m,vx,vz\n";
  for (const Track& t : tracks) {
    for (std::size_t k = 0; k < t.detections.size(); ++k) {
      const Detection& d = t.detections[k];
      // Each row carries the velocity of the step leaving it; the last row
      // repeats the final step.
      Velocity v;
      if (!t.velocities.empty()) v = t.velocities[std::min(k, t.velocities.size() - 1)];
      out << t.id << ',' << d.frame_index << ',' << csv_number(d.x) << ',' << csv_number(d.z) << ','
          << csv_number(v.vx) << ',' << csv_number(v.vz) << '\n';
    }
  }
  finish(out, path);
}

std::string metrics_csv_header() {
  return "beamformer,localizer,local_contrast_mean,local_contrast_std,lateral_spread_lambda";
}

std::string metrics_csv_row(const MetricReport& r) {
  return r.beamformer + "," + r.localizer + "," + csv_number(r.local_contrast_mean) + "," +
         csv_number(r.local_contrast_std) + "," + csv_number(r.lateral_spread_lambda);
}

void write_metrics_csv(const std::string& path, std::span<const MetricReport> reports) {
  std::ofstream out = open_out(path);
  out << metrics_csv_header() << '\n';
  for (const MetricReport& r : reports) out << metrics_csv_row(r) << '\n';
  finish(out, path);
}

}  // namespace ulm
