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

#include "ulm/localize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace ulm {
namespace {

constexpr auto kN = Patch::kSize;
constexpr double kHalf = static_cast<double>(Patch::kHalf);

// Offsets are in pixels relative to the patch center, x lateral, z axial.
Detection to_detection(const Patch& patch, double dx_px, double dz_px, Localizer method) {
  Detection d;
  d.x = patch.center_x + dx_px * patch.pitch_x;
  d.z = patch.center_z + dz_px * patch.pitch_z;
  d.intensity = patch.center_value();
  d.method = method;
  return d;
}

bool inside_patch(double dx_px, double dz_px) {
  return std::abs(dx_px) <= kHalf && std::abs(dz_px) <= kHalf;
}

// Natural cubic spline through y at abscissae 0..4, evaluated at t in [0, 4].
class NaturalSpline5 {
 public:
  explicit NaturalSpline5(const std::array<double, kN>& y) : y_(y) {
    // Interior second derivatives from the tridiagonal system
    // M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]), M[0] = M[4] = 0.
    std::array<double, kN> rhs{};
    for (std::size_t i = 1; i + 1 < kN; ++i) rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
    std::array<double, kN> diag{}, upper{};
    diag[1] = 4.0;
    upper[1] = rhs[1];
    for (std::size_t i = 2; i + 1 < kN; ++i) {
      const double m = 1.0 / diag[i - 1];
      diag[i] = 4.0 - m;
      upper[i] = rhs[i] - m * upper[i - 1];
    }
    m_[kN - 1] = 0.0;
    m_[0] = 0.0;
    for (std::size_t i = kN - 2; i >= 1; --i) m_[i] = (upper[i] - m_[i + 1]) / diag[i];
  }

  double operator()(double t) const {
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(t, 0.0)), kN - 2);
    const double u = t - static_cast<double>(i);
    const double v = 1.0 - u;
    return v * y_[i] + u * y_[i + 1] + ((v * v * v - v) * m_[i] + (u * u * u - u) * m_[i + 1]) / 6.0;
  }

 private:
  std::array<double, kN> y_;
  std::array<double, kN> m_{};
};

}  // namespace

const char* to_string(Localizer method) {
  switch (method) {
    case Localizer::SpInterp: return "SpInterp";
    case Localizer::GaussFit: return "GaussFit";
    case Localizer::WA: return "WA";
    case Localizer::RS: return "RS";
  }
  return "?";
}

std::optional<Localizer> parse_localizer(std::string_view name) {
  for (Localizer m : kAllLocalizers)
    if (name == to_string(m)) return m;
  return std::nullopt;
}

std::vector<Patch> detect_candidates(const BfImage& img, const DetectorParams& params) {
  if (img.kind != ImageKind::envelope)
    throw std::invalid_argument("detect_candidates: input must be an envelope image");
  if (params.max_count < 1) throw std::invalid_argument("detect_candidates: max_count must be >= 1");
  const auto& v = img.values;
  const std::size_t rows = v.rows();
  const std::size_t cols = v.cols();
  std::vector<Patch> out;
  if (rows == 0 || cols == 0) return out;

  double peak = 0.0;
  for (double x : v.data()) peak = std::max(peak, x);
  if (!(peak > 0.0)) return out;
  const double threshold = params.threshold_rel * peak;

  struct Candidate {
    double value;
    std::size_t row, col;
  };
  std::vector<Candidate> candidates;
  const auto radius = static_cast<std::ptrdiff_t>(Patch::kHalf);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double value = v(r, c);
      if (!(value > 0.0) || value < threshold) continue;
      bool is_max = true;
      for (std::ptrdiff_t dr = -radius; dr <= radius && is_max; ++dr) {
        for (std::ptrdiff_t dc = -radius; dc <= radius; ++dc) {
          const auto rr = static_cast<std::ptrdiff_t>(r) + dr;
          const auto cc = static_cast<std::ptrdiff_t>(c) + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(rows) ||
              cc >= static_cast<std::ptrdiff_t>(cols))
            continue;
          if (v(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) > value) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) candidates.push_back({value, r, c});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  const auto sep = static_cast<std::ptrdiff_t>(params.min_separation_px);
  for (const Candidate& cand : candidates) {
    if (out.size() >= params.max_count) break;
    const bool clipped = cand.row < Patch::kHalf || cand.col < Patch::kHalf ||
                         cand.row + Patch::kHalf >= rows || cand.col + Patch::kHalf >= cols;
    if (clipped) continue;
    const bool suppressed = std::any_of(out.begin(), out.end(), [&](const Patch& p) {
      const auto dr = std::abs(static_cast<std::ptrdiff_t>(p.row) - static_cast<std::ptrdiff_t>(cand.row));
      const auto dc = std::abs(static_cast<std::ptrdiff_t>(p.col) - static_cast<std::ptrdiff_t>(cand.col));
      return std::max(dr, dc) < sep;
    });
    if (suppressed) continue;

    Patch patch;
    patch.row = cand.row;
    patch.col = cand.col;
    patch.center_x = img.grid.x(cand.col);
    patch.center_z = img.grid.z(cand.row);
    patch.pitch_x = img.grid.dx;
    patch.pitch_z = img.grid.dz;
    for (std::size_t r = 0; r < kN; ++r)
      for (std::size_t c = 0; c < kN; ++c)
        patch.values[r][c] = v(cand.row + r - Patch::kHalf, cand.col + c - Patch::kHalf);
    out.push_back(patch);
  }
  return out;
}

Detection localize_sp_interp(const Patch& patch) {
  constexpr std::size_t kFine = 41;
  constexpr double kStep = 0.1;

  // Tensor-product natural spline: rows along x first, then columns along z.
  std::array<std::array<double, kFine>, kN> along_x{};
  for (std::size_t r = 0; r < kN; ++r) {
    const NaturalSpline5 spline(patch.values[r]);
    for (std::size_t k = 0; k < kFine; ++k) along_x[r][k] = spline(static_cast<double>(k) * kStep);
  }

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kFine; ++k) {
    std::array<double, kN> column{};
    for (std::size_t r = 0; r < kN; ++r) column[r] = along_x[r][k];
    const NaturalSpline5 spline(column);
    for (std::size_t j = 0; j < kFine; ++j) best = std::max(best, spline(static_cast<double>(j) * kStep));
  }

  // Values within rounding of the maximum are ties: nearest to the center
  // wins, then the smallest row, then the smallest column.
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::size_t best_row = 0, best_col = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kFine; ++k) {
    std::array<double, kN> column{};
    for (std::size_t r = 0; r < kN; ++r) column[r] = along_x[r][k];
    const NaturalSpline5 spline(column);
    for (std::size_t j = 0; j < kFine; ++j) {
      if (spline(static_cast<double>(j) * kStep) < best - tol) continue;
      const double dj = static_cast<double>(j) - 20.0;
      const double dk = static_cast<double>(k) - 20.0;
      const double dist = dj * dj + dk * dk;
      const bool better = dist < best_dist ||
                          (dist == best_dist && (j < best_row || (j == best_row && k < best_col)));
      if (better) {
        best_dist = dist;
        best_row = j;
        best_col = k;
      }
    }
  }
  const double dx = (static_cast<double>(best_col) - 20.0) * kStep;
  const double dz = (static_cast<double>(best_row) - 20.0) * kStep;
  return to_detection(patch, dx, dz, Localizer::SpInterp);
}

std::optional<Detection> localize_gauss_fit(const Patch& patch) {
  constexpr int kMaxIterations = 100;
  constexpr double kStepTol = 1e-6;
  constexpr double kSigmaMin = 0.05;
  constexpr double kSigmaMax = 5.0;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  int positive = 0;
  for (const auto& row : patch.values) {
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if (v > 0.0) ++positive;
    }
  }
  if (positive < 6) return std::nullopt;
  if (!(hi - lo > 1e-12 * std::max(std::abs(hi), 1e-300))) return std::nullopt;

  // Parameters: amplitude, x0, z0, sigma, offset.
  Eigen::Matrix<double, 5, 1> p;
  p << hi - lo, 0.0, 0.0, 0.5, lo;

  const auto evaluate = [&](const Eigen::Matrix<double, 5, 1>& q, Eigen::Matrix<double, 25, 1>& res,
                            Eigen::Matrix<double, 25, 5>* jac) {
    double cost = 0.0;
    for (std::size_t r = 0; r < kN; ++r) {
      for (std::size_t c = 0; c < kN; ++c) {
        const auto k = static_cast<Eigen::Index>(r * kN + c);
        const double dx = static_cast<double>(c) - kHalf - q(1);
        const double dz = static_cast<double>(r) - kHalf - q(2);
        const double s2 = q(3) * q(3);
        const double rho2 = dx * dx + dz * dz;
        const double g = std::exp(-rho2 / (2.0 * s2));
        res(k) = q(0) * g + q(4) - patch.values[r][c];
        cost += res(k) * res(k);
        if (jac) {
          (*jac)(k, 0) = g;
          (*jac)(k, 1) = q(0) * g * dx / s2;
          (*jac)(k, 2) = q(0) * g * dz / s2;
          (*jac)(k, 3) = q(0) * g * rho2 / (s2 * q(3));
          (*jac)(k, 4) = 1.0;
        }
      }
    }
    return cost;
  };

  Eigen::Matrix<double, 25, 1> res;
  Eigen::Matrix<double, 25, 5> jac;
  double cost = evaluate(p, res, &jac);
  double damping = 1e-3;
  bool converged = false;
  for (int it = 0; it < kMaxIterations && !converged; ++it) {
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 5, 1> grad = jac.transpose() * res;
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix<double, 5, 5> lhs = jtj;
      for (int k = 0; k < 5; ++k) lhs(k, k) += damping * std::max(jtj(k, k), 1e-300);
      const Eigen::Matrix<double, 5, 1> step = lhs.ldlt().solve(-grad);
      if (!step.allFinite()) return std::nullopt;
      const Eigen::Matrix<double, 5, 1> trial = p + step;
      Eigen::Matrix<double, 25, 1> trial_res;
      const double trial_cost = std::abs(trial(3)) > 0.0 ? evaluate(trial, trial_res, nullptr)
                                                         : std::numeric_limits<double>::infinity();
      const double step_norm = std::sqrt(step(1) * step(1) + step(2) * step(2) + step(3) * step(3));
      if (trial_cost <= cost) {
        p = trial;
        cost = evaluate(p, res, &jac);
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
        if (step_norm < kStepTol) converged = true;
      } else {
        damping *= 10.0;
        if (damping > 1e12 || step_norm < kStepTol * 1e-3) {
          // No descent direction left at this precision: at a minimum.
          converged = step_norm < kStepTol;
          if (!converged) return std::nullopt;
          break;
        }
      }
    }
  }
  if (!converged) return std::nullopt;
  const double sigma = std::abs(p(3));
  if (!(sigma > kSigmaMin && sigma < kSigmaMax)) return std::nullopt;
  if (!(p(0) > 0.0) || !inside_patch(p(1), p(2))) return std::nullopt;
  return to_detection(patch, p(1), p(2), Localizer::GaussFit);
}

std::optional<Detection> localize_weighted_average(const Patch& patch, WaLines lines) {
  constexpr std::array<double, kN> kWeights = {-2.0, -1.0, 0.0, 1.0, 2.0};
  std::array<double, kN> center_row{}, center_col{};
  for (std::size_t k = 0; k < kN; ++k) {
    center_row[k] = patch.values[Patch::kHalf][k];
    center_col[k] = patch.values[k][Patch::kHalf];
  }
  const auto offset = [&](const std::array<double, kN>& line) -> std::optional<double> {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < kN; ++k) {
      num += kWeights[k] * line[k];
      den += line[k];
    }
    if (!(den > 0.0)) return std::nullopt;
    return std::clamp(num / den, -kHalf, kHalf);
  };
  const auto& lateral_line = lines == WaLines::matched ? center_row : center_col;
  const auto& axial_line = lines == WaLines::matched ? center_col : center_row;
  const auto dx = offset(lateral_line);
  const auto dz = offset(axial_line);
  if (!dx || !dz) return std::nullopt;
  return to_detection(patch, *dx, *dz, Localizer::WA);
}

std::optional<Detection> localize_radial_symmetry(const Patch& patch) {
  constexpr std::size_t kM = kN - 1;
  std::array<double, kM * kM> mx{}, mz{}, gx{}, gz{}, mag2{};
  double mag_sum = 0.0, cx = 0.0, cz = 0.0;
  for (std::size_t r = 0; r < kM; ++r) {
    for (std::size_t c = 0; c < kM; ++c) {
      const std::size_t k = r * kM + c;
      // Diagonal differences across the 2x2 cell, rotated onto x/z.
      const double du = patch.values[r][c + 1] - patch.values[r + 1][c];
      const double dv = patch.values[r][c] - patch.values[r + 1][c + 1];
      gx[k] = 0.5 * (du - dv);
      gz[k] = -0.5 * (du + dv);
      mx[k] = static_cast<double>(c) + 0.5 - kHalf;
      mz[k] = static_cast<double>(r) + 0.5 - kHalf;
      mag2[k] = gx[k] * gx[k] + gz[k] * gz[k];
      mag_sum += mag2[k];
      cx += mag2[k] * mx[k];
      cz += mag2[k] * mz[k];
    }
  }
  if (!(mag_sum > 0.0)) return std::nullopt;
  cx /= mag_sum;
  cz /= mag_sum;

  // Weighted least squares for the point closest to every gradient line.
  Eigen::Matrix2d lhs = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (std::size_t k = 0; k < kM * kM; ++k) {
    if (!(mag2[k] > 0.0)) continue;
    const double dist = std::max(std::hypot(mx[k] - cx, mz[k] - cz), 1e-6);
    const double w = mag2[k] / dist;
    const double mag = std::sqrt(mag2[k]);
    const Eigen::Vector2d normal(-gz[k] / mag, gx[k] / mag);
    const Eigen::Matrix2d nnt = normal * normal.transpose();
    lhs += w * nnt;
    rhs += w * nnt * Eigen::Vector2d(mx[k], mz[k]);
  }
  const double det = lhs.determinant();
  const double scale = lhs.trace();
  if (!(std::abs(det) > 1e-12 * scale * scale)) return std::nullopt;
  const Eigen::Vector2d center = lhs.inverse() * rhs;
  if (!center.allFinite() || !inside_patch(center(0), center(1))) return std::nullopt;
  return to_detection(patch, center(0), center(1), Localizer::RS);
}

std::optional<Detection> localize_patch(const Patch& patch, Localizer method,
                                        const LocalizerOptions& options) {
  switch (method) {
    case Localizer::SpInterp: return localize_sp_interp(patch);
    case Localizer::GaussFit: return localize_gauss_fit(patch);
    case Localizer::WA: return localize_weighted_average(patch, options.wa_lines);
    case Localizer::RS: return localize_radial_symmetry(patch);
  }
  return std::nullopt;
}

std::vector<Detection> localize_frame(const BfImage& img, std::size_t frame_index, Localizer method,
                                      const DetectorParams& params, const LocalizerOptions& options) {
  std::vector<Detection> out;
  for (const Patch& patch : detect_candidates(img, params)) {
    auto d = localize_patch(patch, method, options);
    if (!d) continue;
    d->frame_index = frame_index;
    out.push_back(*d);
  }
  return out;
}

}  // namespace ulm
