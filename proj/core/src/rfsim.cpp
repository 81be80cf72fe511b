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

#include "ulm/rfsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace ulm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(seed ^ splitmix64(a)) ^ b) ^ c);
}

// Stream tags keep the per-purpose random streams apart.
constexpr std::uint64_t kPhaseStream = 0x5048415345ULL;
constexpr std::uint64_t kJitterStream = 0x4a4954544552ULL;
constexpr std::uint64_t kNoiseStream = 0x4e4f495345ULL;

struct PulseShape {
  double fc = 0.0;
  double fs = 0.0;
  double center = 0.0;  // in samples
  double last = 0.0;    // L - 1
  double norm = 1.0;

  double operator()(double tau) const {
    const double k = tau * fs + center;
    if (k < 0.0 || k > last) return 0.0;
    const double window = last > 0.0 ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / last)) : 1.0;
    return window * std::cos(2.0 * std::numbers::pi * fc * tau) / norm;
  }
  double half_duration() const { return center / fs; }
};

PulseShape pulse_shape(const Probe& probe, std::size_t n_cycles) {
  if (n_cycles < 1) throw std::invalid_argument("make_pulse: n_cycles must be >= 1");
  if (probe.fs <= 2.0 * probe.fc) throw std::invalid_argument("make_pulse: fs <= 2 fc aliases the carrier");
  const auto length = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_cycles) * probe.fs / probe.fc));
  if (length < 1) throw std::invalid_argument("make_pulse: pulse shorter than one sample");
  PulseShape shape{probe.fc, probe.fs, 0.5 * static_cast<double>(length - 1),
                   static_cast<double>(length - 1), 1.0};
  double peak = 0.0;
  for (std::size_t k = 0; k < length; ++k)
    peak = std::max(peak, std::abs(shape((static_cast<double>(k) - shape.center) / probe.fs)));
  shape.norm = peak > 0.0 ? peak : 1.0;
  return shape;
}

}  // namespace

double Probe::element_x(std::size_t i) const {
  return (static_cast<double>(i) - 0.5 * static_cast<double>(n_elements - 1)) * pitch;
}

double Probe::aperture_half_width() const {
  return 0.5 * static_cast<double>(n_elements - 1) * pitch;
}

void Probe::validate() const {
  if (n_elements < 2) throw std::invalid_argument("probe: n_elements must be >= 2");
  if (!(pitch > 0.0)) throw std::invalid_argument("probe: pitch must be > 0");
  if (!(fc > 0.0)) throw std::invalid_argument("probe: fc must be > 0");
  if (!(fs > 2.0 * fc)) throw std::invalid_argument("probe: fs must exceed 2 fc");
  if (!(c > 0.0)) throw std::invalid_argument("probe: c must be > 0");
  if (!(frame_rate > 0.0)) throw std::invalid_argument("probe: frame_rate must be > 0");
}

double Canal::length() const {
  double total = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k)
    total += std::hypot(points[k].x - points[k - 1].x, points[k].z - points[k - 1].z);
  return total;
}

Point Canal::point_at(double s) const {
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double seg = std::hypot(points[k].x - points[k - 1].x, points[k].z - points[k - 1].z);
    if (s <= seg || k + 1 == points.size()) {
      const double t = seg > 0.0 ? std::clamp(s / seg, 0.0, 1.0) : 0.0;
      return {points[k - 1].x + t * (points[k].x - points[k - 1].x),
              points[k - 1].z + t * (points[k].z - points[k - 1].z)};
    }
    s -= seg;
  }
  return points.front();
}

Point Canal::tangent_at(double s) const {
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double dx = points[k].x - points[k - 1].x;
    const double dz = points[k].z - points[k - 1].z;
    const double seg = std::hypot(dx, dz);
    if ((s <= seg || k + 1 == points.size()) && seg > 0.0) return {dx / seg, dz / seg};
    s -= seg;
  }
  return {0.0, 1.0};
}

void PhantomSpec::validate(const Probe& probe) const {
  if (n_frames < 1) throw std::invalid_argument("phantom: n_frames must be >= 1");
  if (pulse_cycles < 1) throw std::invalid_argument("phantom: pulse_cycles must be >= 1");
  if (!(z_min > 0.0)) throw std::invalid_argument("phantom: z_min must be > 0");
  for (std::size_t k = 0; k < canals.size(); ++k) {
    const Canal& canal = canals[k];
    const std::string where = "phantom: canal " + std::to_string(k);
    if (canal.points.size() < 2) throw std::invalid_argument(where + " needs >= 2 control points");
    if (!(canal.diameter > 0.0)) throw std::invalid_argument(where + " diameter must be > 0");
    if (!(canal.speed >= 0.0)) throw std::invalid_argument(where + " speed must be >= 0");
    if (!(canal.length() > 0.0)) throw std::invalid_argument(where + " has zero length");
    for (const Point& p : canal.points) {
      if (!(p.z > 0.0) || std::abs(p.x) > probe.aperture_half_width())
        throw std::invalid_argument(where + " control point outside the imaging field");
    }
  }
}

std::vector<double> make_pulse(const Probe& probe, std::size_t n_cycles) {
  const PulseShape shape = pulse_shape(probe, n_cycles);
  const auto length = static_cast<std::size_t>(shape.last) + 1;
  std::vector<double> out(length);
  for (std::size_t k = 0; k < length; ++k)
    out[k] = shape((static_cast<double>(k) - shape.center) / probe.fs);
  return out;
}

double pulse_value(const Probe& probe, std::size_t n_cycles, double tau) {
  return pulse_shape(probe, n_cycles)(tau);
}

std::vector<Bubble> advance_bubbles(const PhantomSpec& spec, double frame_rate,
                                    std::size_t frame_index) {
  std::vector<Bubble> out;
  if (spec.canals.empty()) return out;
  if (frame_index >= spec.n_frames)
    throw std::invalid_argument("advance_bubbles: frame_index beyond n_frames");
  out.reserve(spec.bubbles_per_frame);
  const double t = static_cast<double>(frame_index) / frame_rate;
  for (std::size_t slot = 0; slot < spec.bubbles_per_frame; ++slot) {
    const std::size_t canal_index = slot % spec.canals.size();
    const Canal& canal = spec.canals[canal_index];
    const double length = canal.length();

    std::mt19937_64 phase_rng(mix_seed(spec.rng_seed, kPhaseStream, slot, 0));
    const double s0 = std::uniform_real_distribution<double>(0.0, length)(phase_rng);
    const double s = s0 + canal.speed * t;
    const double pass = std::floor(s / length);
    const double along = std::clamp(s - pass * length, 0.0, length);

    const auto pass_index = static_cast<std::uint64_t>(pass);
    std::mt19937_64 jitter_rng(mix_seed(spec.rng_seed, kJitterStream, slot, pass_index));
    const double radius = 0.5 * canal.diameter;
    const double jitter = std::clamp(
        std::uniform_real_distribution<double>(-radius, radius)(jitter_rng), -radius, radius);

    const Point axis = canal.point_at(along);
    const Point tangent = canal.tangent_at(along);
    out.push_back({{axis.x - tangent.z * jitter, axis.z + tangent.x * jitter},
                   canal_index, slot, pass_index});
  }
  return out;
}

std::size_t record_length(const PhantomSpec& spec, const Probe& probe) {
  double t_max = 0.0;
  for (const Canal& canal : spec.canals) {
    for (const Point& p : canal.points) {
      const double z = p.z + canal.diameter;
      const double lateral = std::abs(p.x) + canal.diameter + probe.aperture_half_width();
      t_max = std::max(t_max, (z + std::hypot(lateral, z)) / probe.c);
    }
  }
  const auto pulse_len = make_pulse(probe, spec.pulse_cycles).size();
  return static_cast<std::size_t>(std::ceil(t_max * probe.fs)) + pulse_len + 16;
}

double noise_sigma(const PhantomSpec& spec) {
  if (!spec.noise_db) return 0.0;
  double z_ref = std::numeric_limits<double>::infinity();
  for (const Canal& canal : spec.canals)
    for (const Point& p : canal.points) z_ref = std::min(z_ref, p.z - 0.5 * canal.diameter);
  if (!std::isfinite(z_ref)) z_ref = spec.z_min;
  const double peak_echo = 1.0 / std::max(z_ref, spec.z_min);
  return peak_echo * std::pow(10.0, *spec.noise_db / 20.0);
}

RfFrame simulate_scatterers(const std::vector<Point>& scatterers, const Probe& probe,
                            std::size_t n_samples, std::size_t n_cycles, double z_min,
                            double sigma, std::uint64_t noise_seed, std::size_t frame_index) {
  probe.validate();
  if (n_samples == 0) throw std::invalid_argument("simulate: n_samples must be > 0");
  const PulseShape pulse = pulse_shape(probe, n_cycles);
  const std::size_t n_ch = probe.n_elements;
  std::vector<double> acc(n_samples * n_ch, 0.0);

  for (const Point& s : scatterers) {
    if (!(s.z > 0.0)) throw std::invalid_argument("simulate: scatterer depth must be > 0");
    const double amplitude = 1.0 / std::max(s.z, z_min);
    for (std::size_t ch = 0; ch < n_ch; ++ch) {
      const double dx = probe.element_x(ch) - s.x;
      const double t = (s.z + std::sqrt(dx * dx + s.z * s.z)) / probe.c;
      const double first = std::ceil((t - pulse.half_duration()) * probe.fs);
      const double last = std::floor((t + pulse.half_duration()) * probe.fs);
      for (double n = std::max(first, 0.0); n <= last && n < static_cast<double>(n_samples); n += 1.0) {
        const auto idx = static_cast<std::size_t>(n);
        acc[idx * n_ch + ch] += amplitude * pulse(n / probe.fs - t);
      }
    }
  }

  if (sigma > 0.0) {
    std::mt19937_64 rng(mix_seed(noise_seed, kNoiseStream, frame_index, 0));
    std::normal_distribution<double> gauss(0.0, sigma);
    for (double& v : acc) v += gauss(rng);
  }

  RfFrame frame;
  frame.samples = Raster<float>(n_samples, n_ch);
  auto out = frame.samples.data();
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = static_cast<float>(acc[k]);
  frame.frame_index = frame_index;
  frame.probe = probe;
  frame.t0 = 0.0;
  return frame;
}

RfFrame simulate_frame(const PhantomSpec& spec, const Probe& probe, std::size_t frame_index) {
  probe.validate();
  spec.validate(probe);
  std::vector<Point> scatterers;
  for (const Bubble& b : advance_bubbles(spec, probe.frame_rate, frame_index))
    scatterers.push_back(b.position);
  return simulate_scatterers(scatterers, probe, record_length(spec, probe), spec.pulse_cycles,
                             spec.z_min, noise_sigma(spec), spec.rng_seed, frame_index);
}

PhantomSpec default_phantom(const Probe& probe) {
  const double lambda = probe.wavelength();
  PhantomSpec spec;

  const double twin_x = -0.8e-3;
  const double twin_half_gap = 0.2 * lambda;
  const double twin_diameter = 0.1 * lambda;
  spec.canals.push_back({{{twin_x - twin_half_gap, 9.0e-3}, {twin_x - twin_half_gap, 11.0e-3}},
                         twin_diameter, 12e-3});
  spec.canals.push_back({{{twin_x + twin_half_gap, 9.0e-3}, {twin_x + twin_half_gap, 11.0e-3}},
                         twin_diameter, 9e-3});

  spec.canals.push_back({{{-0.2e-3, 9.4e-3}, {1.6e-3, 9.4e-3}}, 30e-6, 20e-3});

  Canal s_curve{{}, 30e-6, 20e-3};
  constexpr int kSegments = 16;
  for (int k = 0; k <= kSegments; ++k) {
    const double u = static_cast<double>(k) / kSegments;
    s_curve.points.push_back({1.6e-3 * u, 10.3e-3 + 0.35e-3 * std::sin(2.0 * std::numbers::pi * u)});
  }
  spec.canals.push_back(std::move(s_curve));
  return spec;
}

}  // namespace ulm
