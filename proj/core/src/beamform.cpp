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

#include "ulm/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "ulm/parallel.hpp"

namespace ulm {
namespace {

// Linear interpolation of one channel at a fractional sample index; zero
// outside the record.
inline double sample_at(const Raster<float>& samples, std::size_t ch, double index) {
  if (index < 0.0) return 0.0;
  const auto lo = static_cast<std::size_t>(index);
  if (lo + 1 >= samples.rows()) {
    return (lo + 1 == samples.rows() && index == static_cast<double>(lo)) ? samples(lo, ch) : 0.0;
  }
  const double frac = index - static_cast<double>(lo);
  return (1.0 - frac) * samples(lo, ch) + frac * samples(lo + 1, ch);
}

void check_inputs(const RfFrame& frame, const BeamGrid& grid) {
  grid.validate();
  frame.probe.validate();
  if (frame.n_channels() != frame.probe.n_elements)
    throw std::invalid_argument("beamform: channel count does not match probe");
  if (grid.z0 <= 0.0) throw std::invalid_argument("beamform: grid must lie below the probe (z > 0)");
}

// Calls fn(row, col, element, weighted_sample) for every contributing channel
// of every pixel in ascending element order; per-pixel reduction happens in
// the caller through begin/end hooks.
template <typename PixelFn>
void for_each_pixel(const RfFrame& frame, const BeamGrid& grid, const Apodization& apod,
                    PixelFn&& pixel_fn) {
  const Probe& probe = frame.probe;
  const std::size_t n_ch = probe.n_elements;
  std::vector<double> element_x(n_ch);
  for (std::size_t i = 0; i < n_ch; ++i) element_x[i] = probe.element_x(i);

  parallel_for(grid.nx, [&](std::size_t col) {
    std::vector<double> weighted;
    weighted.reserve(n_ch);
    const double xp = grid.x(col);
    for (std::size_t row = 0; row < grid.nz; ++row) {
      const double zp = grid.z(row);
      weighted.clear();
      for (std::size_t i = 0; i < n_ch; ++i) {
        const double w = apod.weight(element_x[i] - xp, zp);
        if (w <= 0.0) continue;
        const double delay = propagation_delay(xp, zp, element_x[i], probe.c);
        const double index = (delay - frame.t0) * probe.fs;
        weighted.push_back(w * sample_at(frame.samples, i, index));
      }
      pixel_fn(row, col, std::span<const double>(weighted));
    }
  });
}

}  // namespace

BeamGrid BeamGrid::span(double x_min, double x_max, double z_min, double z_max, double pitch_x,
                        double pitch_z) {
  if (!(pitch_x > 0.0) || !(pitch_z > 0.0)) throw std::invalid_argument("grid: pitch must be > 0");
  if (!(x_max >= x_min) || !(z_max >= z_min)) throw std::invalid_argument("grid: inverted bounds");
  BeamGrid g;
  g.x0 = x_min;
  g.dx = pitch_x;
  g.nx = static_cast<std::size_t>(std::floor((x_max - x_min) / pitch_x + 1e-9)) + 1;
  g.z0 = z_min;
  g.dz = pitch_z;
  g.nz = static_cast<std::size_t>(std::floor((z_max - z_min) / pitch_z + 1e-9)) + 1;
  return g;
}

BeamGrid BeamGrid::refined_axial(std::size_t factor) const {
  if (factor == 0) throw std::invalid_argument("grid: refinement factor must be >= 1");
  BeamGrid g = *this;
  g.dz = dz / static_cast<double>(factor);
  g.nz = nz == 0 ? 0 : (nz - 1) * factor + 1;
  return g;
}

void BeamGrid::validate() const {
  if (empty()) throw std::invalid_argument("grid: empty grid");
  if (!(dx > 0.0) || !(dz > 0.0)) throw std::invalid_argument("grid: pitch must be > 0");
}

double Apodization::weight(double lateral_offset, double z) const {
  const double half_aperture = z / (2.0 * f_number);
  const double d = std::abs(lateral_offset);
  if (d > half_aperture) return 0.0;
  if (kind == ApodKind::rect) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * d / half_aperture));
}

const char* to_string(Beamformer bf) { return bf == Beamformer::DAS ? "DAS" : "FDMAS"; }

double propagation_delay(double x_p, double z_p, double x_i, double c) {
  if (!(z_p > 0.0)) throw std::invalid_argument("propagation_delay: pixel depth must be > 0");
  const double dx = x_i - x_p;
  return (z_p + std::sqrt(dx * dx + z_p * z_p)) / c;
}

double signed_sqrt(double u) { return std::copysign(std::sqrt(std::abs(u)), u); }

double dmas_pixel(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("dmas_pixel: needs at least 2 channels");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : v) {
    sum += x;
    sum_sq += x * x;
  }
  return 0.5 * (sum * sum - sum_sq);
}

BfImage das_image(const RfFrame& frame, const BeamGrid& grid, const Apodization& apod) {
  check_inputs(frame, grid);
  BfImage img{Raster<double>(grid.nz, grid.nx), grid, ImageKind::rf_grid, Beamformer::DAS};
  for_each_pixel(frame, grid, apod, [&](std::size_t row, std::size_t col, std::span<const double> u) {
    double acc = 0.0;
    for (double x : u) acc += x;
    img.values(row, col) = acc;
  });
  return img;
}

BfImage dmas_image(const RfFrame& frame, const BeamGrid& grid, const Apodization& apod) {
  check_inputs(frame, grid);
  BfImage img{Raster<double>(grid.nz, grid.nx), grid, ImageKind::rf_grid, Beamformer::FDMAS};
  for_each_pixel(frame, grid, apod, [&](std::size_t row, std::size_t col, std::span<const double> u) {
    if (u.size() < 2) return;
    thread_local std::vector<double> v;
    v.resize(u.size());
    std::transform(u.begin(), u.end(), v.begin(), signed_sqrt);
    img.values(row, col) = dmas_pixel(v);
  });
  return img;
}

double axial_sample_rate(const BeamGrid& grid, double c) { return c / (2.0 * grid.dz); }

std::vector<double> design_bandpass(const BandpassSpec& bpf, double fc, double fs) {
  const double center = bpf.center > 0.0 ? bpf.center : 2.0 * fc;
  if (bpf.n_taps < 3 || bpf.n_taps % 2 == 0)
    throw std::invalid_argument("bandpass: n_taps must be odd and >= 3");
  if (!(center > 0.0) || !(center < 0.5 * fs))
    throw std::invalid_argument("bandpass: center must lie in (0, fs/2)");
  if (!(bpf.fractional_bandwidth > 0.0))
    throw std::invalid_argument("bandpass: fractional bandwidth must be > 0");

  const double f1 = std::max(0.0, center * (1.0 - 0.5 * bpf.fractional_bandwidth)) / fs;
  const double f2 = std::min(0.5 * fs, center * (1.0 + 0.5 * bpf.fractional_bandwidth)) / fs;
  const auto lowpass = [](double f, double m) {
    if (m == 0.0) return 2.0 * f;
    return std::sin(2.0 * std::numbers::pi * f * m) / (std::numbers::pi * m);
  };

  const std::size_t n = bpf.n_taps;
  const double mid = 0.5 * static_cast<double>(n - 1);
  std::vector<double> taps(n);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double m = static_cast<double>(k) - mid;
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
    taps[k] = hamming * (lowpass(f2, m) - lowpass(f1, m));
    taps[n - 1 - k] = taps[k];
  }
  std::complex<double> gain = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double m = static_cast<double>(k) - mid;
    gain += taps[k] * std::polar(1.0, -2.0 * std::numbers::pi * center / fs * m);
  }
  for (double& t : taps) t /= std::abs(gain);
  return taps;
}

std::vector<double> filtfilt(std::span<const double> taps, std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n == 0) return {};
  if (taps.size() % 2 == 0) throw std::invalid_argument("filtfilt: taps must have odd length");
  const std::size_t pad = std::min(n - 1, 3 * taps.size());
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t k = 0; k < pad; ++k) {
    ext[pad - 1 - k] = signal[k + 1];
    ext[pad + n + k] = signal[n - 2 - k];
  }
  std::copy(signal.begin(), signal.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  const auto half = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto len = static_cast<std::ptrdiff_t>(ext.size());
  std::vector<double> tmp(ext.size());
  // Forward pass, then the time-reversed pass. For symmetric taps both are
  // the same centered convolution.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        const std::ptrdiff_t j = pass == 0 ? i - k : i + k;
        if (j >= 0 && j < len) acc += taps[static_cast<std::size_t>(k + half)] * ext[static_cast<std::size_t>(j)];
      }
      tmp[static_cast<std::size_t>(i)] = acc;
    }
    ext.swap(tmp);
  }
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

BfImage fdmas_image(const RfFrame& frame, const BeamGrid& grid, const Apodization& apod,
                    const BandpassSpec& bpf) {
  BfImage img = dmas_image(frame, grid, apod);
  const auto taps = design_bandpass(bpf, frame.probe.fc, axial_sample_rate(grid, frame.probe.c));
  for (std::size_t col = 0; col < grid.nx; ++col) {
    const auto line = img.values.column(col);
    img.values.set_column(col, filtfilt(taps, line));
  }
  return img;
}

std::vector<double> analytic_magnitude(std::span<const double> line) {
  const std::size_t n = line.size();
  if (n == 0) return {};
  std::vector<std::complex<double>> time(line.begin(), line.end());
  std::vector<std::complex<double>> freq;
  Eigen::FFT<double> fft;
  fft.fwd(freq, time);
  // One-sided spectrum: DC and Nyquist kept, positive bins doubled.
  const std::size_t positive_end = (n + 1) / 2;
  for (std::size_t k = 1; k < positive_end; ++k) freq[k] *= 2.0;
  for (std::size_t k = n / 2 + 1; k < n; ++k) freq[k] = 0.0;
  fft.inv(time, freq);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::abs(time[k]);
  return out;
}

BfImage envelope(const BfImage& img) {
  if (img.kind != ImageKind::rf_grid) throw std::invalid_argument("envelope: input must be an rf_grid image");
  BfImage out{Raster<double>(img.values.rows(), img.values.cols()), img.grid, ImageKind::envelope,
              img.beamformer};
  for (std::size_t col = 0; col < img.values.cols(); ++col) {
    const auto line = img.values.column(col);
    out.values.set_column(col, analytic_magnitude(line));
  }
  return out;
}

BfImage log_compress(const BfImage& img, double dynamic_range_db) {
  if (img.kind != ImageKind::envelope) throw std::invalid_argument("log_compress: input must be an envelope image");
  if (!(dynamic_range_db > 0.0)) throw std::invalid_argument("log_compress: dynamic range must be > 0");
  double peak = 0.0;
  for (double v : img.values.data()) peak = std::max(peak, v);
  if (!(peak > 0.0)) throw std::invalid_argument("log_compress: all-zero image");
  BfImage out{Raster<double>(img.values.rows(), img.values.cols()), img.grid, ImageKind::bmode_db,
              img.beamformer};
  const auto src = img.values.data();
  auto dst = out.values.data();
  for (std::size_t k = 0; k < src.size(); ++k) {
    const double db = src[k] > 0.0 ? 20.0 * std::log10(src[k] / peak) : -dynamic_range_db;
    dst[k] = std::max(db, -dynamic_range_db);
  }
  return out;
}

BfImage decimate_axial(const BfImage& img, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("decimate_axial: factor must be >= 1");
  BfImage out = img;
  const std::size_t rows = img.values.rows() == 0 ? 0 : (img.values.rows() - 1) / factor + 1;
  out.values = Raster<double>(rows, img.values.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = img.values.row(r * factor);
    std::copy(src.begin(), src.end(), out.values.row(r).begin());
  }
  out.grid.dz = img.grid.dz * static_cast<double>(factor);
  out.grid.nz = rows;
  return out;
}

}  // namespace ulm
