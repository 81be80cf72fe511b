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

#include "ulm/clutter.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ulm {
namespace {

// Eigenpairs of a symmetric matrix sorted by descending eigenvalue; equal
// eigenvalues keep the solver's column order.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sorted_eigen(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("svd_filter: eigendecomposition failed");
  const auto n = sym.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  Eigen::VectorXd sorted_values(n);
  Eigen::MatrixXd sorted_vectors(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    sorted_values(k) = std::max(0.0, values(order[static_cast<std::size_t>(k)]));
    sorted_vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return {sorted_values, sorted_vectors};
}

}  // namespace

void ImageStack::validate() const {
  if (frames.size() < 2) throw std::invalid_argument("image stack: needs at least 2 frames");
  for (const BfImage& f : frames) {
    if (!(f.grid == frames.front().grid) || f.kind != frames.front().kind)
      throw std::invalid_argument("image stack: frames must share grid and kind");
    if (f.values.rows() != f.grid.nz || f.values.cols() != f.grid.nx)
      throw std::invalid_argument("image stack: frame dimensions do not match grid");
  }
}

std::size_t ImageStack::n_pixels() const { return frames.empty() ? 0 : frames.front().values.size(); }

Eigen::MatrixXd ImageStack::casorati() const {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(n_pixels()), static_cast<Eigen::Index>(frames.size()));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto values = frames[f].values.data();
    for (std::size_t p = 0; p < values.size(); ++p)
      c(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(f)) = values[p];
  }
  return c;
}

ImageStack ImageStack::with_casorati(const Eigen::MatrixXd& c) const {
  ImageStack out = *this;
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    auto values = out.frames[f].values.data();
    for (std::size_t p = 0; p < values.size(); ++p)
      values[p] = c(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(f));
  }
  return out;
}

Eigen::VectorXd casorati_singular_values(const ImageStack& stack) {
  stack.validate();
  const Eigen::MatrixXd c = stack.casorati();
  const bool tall = c.rows() >= c.cols();
  const Eigen::MatrixXd gram = tall ? Eigen::MatrixXd(c.transpose() * c) : Eigen::MatrixXd(c * c.transpose());
  return sorted_eigen(gram).first.cwiseSqrt();
}

ImageStack svd_filter(const ImageStack& stack, std::size_t cut_low, std::size_t cut_high) {
  stack.validate();
  const std::size_t rank_bound = std::min(stack.n_pixels(), stack.frames.size());
  if (cut_low + cut_high >= rank_bound)
    throw std::invalid_argument("svd_filter: cut_low + cut_high must be < min(n_pixels, n_frames)");
  if (cut_low == 0 && cut_high == 0) return stack;

  const Eigen::MatrixXd c = stack.casorati();
  const bool tall = c.rows() >= c.cols();
  // With C = U S V^T, keeping components k in [cut_low, r - cut_high) is a
  // projection: C V_k V_k^T from the frame-side Gram matrix, or U_k U_k^T C
  // from the pixel side when there are more frames than pixels.
  const Eigen::MatrixXd gram = tall ? Eigen::MatrixXd(c.transpose() * c) : Eigen::MatrixXd(c * c.transpose());
  const auto [values, vectors] = sorted_eigen(gram);
  const auto keep_begin = static_cast<Eigen::Index>(cut_low);
  const auto keep_count = static_cast<Eigen::Index>(rank_bound - cut_low - cut_high);
  const Eigen::MatrixXd basis = vectors.middleCols(keep_begin, keep_count);
  const Eigen::MatrixXd filtered =
      tall ? Eigen::MatrixXd(c * basis * basis.transpose()) : Eigen::MatrixXd(basis * basis.transpose() * c);
  return stack.with_casorati(filtered);
}

}  // namespace ulm
