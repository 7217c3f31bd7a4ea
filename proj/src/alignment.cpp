// Copyright 2026 The Tristream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tristream/alignment.hpp"

#include <cmath>

namespace tristream {

namespace {

constexpr double kNormFloor = 1e-12;

struct Normalized {
  Mat rows;  // unit rows
  Vec norms;
};

Normalized normalize_rows(const Mat& x, const char* what) {
  Normalized n;
  n.norms = x.rowwise().norm();
  if ((n.norms.array() < kNormFloor).any())
    throw input_error(std::string("alignment: zero-norm row in ") + what);
  n.rows = x.array().colwise() / n.norms.array();
  return n;
}

Mat rowwise_softmax(const Mat& a) {
  Mat shifted = a.colwise() - a.rowwise().maxCoeff();
  Mat e = shifted.array().exp();
  return e.array().colwise() / e.rowwise().sum().array();
}

void check_batch(const AlignmentBatch& batch) {
  if (batch.m.rows() != batch.v.rows() || batch.m.cols() != batch.v.cols())
    throw input_error("alignment: batch shapes differ");
  if (batch.m.rows() < 1) throw input_error("alignment: empty batch");
}

// Shared cosine-similarity backward pass: given dL/dS for S = m_hat v_hat^T,
// produce gradients with respect to the raw (unnormalized) rows.
void cosine_backward(const Mat& g, const Mat& s, const Normalized& m, const Normalized& v,
                     Mat& d_m, Mat& d_v) {
  const Vec row_dot = (g.array() * s.array()).rowwise().sum();
  const Vec col_dot = (g.array() * s.array()).colwise().sum().transpose();
  d_m += ((g * v.rows - row_dot.asDiagonal() * m.rows).array().colwise() / m.norms.array()).matrix();
  d_v += ((g.transpose() * m.rows - col_dot.asDiagonal() * v.rows).array().colwise() / v.norms.array())
             .matrix();
}

}  // namespace

LossGrads infonce_loss(const AlignmentBatch& batch, double tau) {
  check_batch(batch);
  const Eigen::Index b = batch.size();
  if (b < 2) throw input_error("infonce: batch size must be >= 2");
  if (!(tau > 0)) throw input_error("infonce: temperature must be positive");

  const Normalized m = normalize_rows(batch.m, "m");
  const Normalized v = normalize_rows(batch.v, "v");
  const Mat s = m.rows * v.rows.transpose();
  const Mat a = s / tau;

  const Mat p = rowwise_softmax(a);                // motion -> visual direction
  const Mat q = rowwise_softmax(a.transpose()).transpose();  // visual -> motion

  double loss = 0.0;
  for (Eigen::Index k = 0; k < b; ++k)
    loss += std::log(p(k, k)) + std::log(q(k, k));
  loss /= -2.0 * static_cast<double>(b);

  Mat d_a = (p + q) / (2.0 * static_cast<double>(b));
  d_a.diagonal().array() -= 1.0 / static_cast<double>(b);

  LossGrads out;
  out.loss = loss;
  out.d_m = Mat::Zero(batch.m.rows(), batch.m.cols());
  out.d_v = Mat::Zero(batch.v.rows(), batch.v.cols());
  const Mat g = d_a / tau;
  cosine_backward(g, s, m, v, out.d_m, out.d_v);
  out.d_log_tau = -(g.array() * s.array()).sum();
  return out;
}

LossGrads align_loss(const AlignmentBatch& batch, const AlignmentHead& head) {
  LossGrads out = infonce_loss(batch, head.tau());
  if (batch.lambda_cos == 0.0) return out;

  const Eigen::Index b = batch.size();
  const Normalized m = normalize_rows(batch.m, "m");
  const Normalized v = normalize_rows(batch.v, "v");
  const Vec diag_cos = (m.rows.array() * v.rows.array()).rowwise().sum();
  out.loss += batch.lambda_cos * (1.0 - diag_cos.array()).mean();

  const double scale = -batch.lambda_cos / static_cast<double>(b);
  for (Eigen::Index k = 0; k < b; ++k) {
    out.d_m.row(k) += scale * (v.rows.row(k) - diag_cos[k] * m.rows.row(k)) / m.norms[k];
    out.d_v.row(k) += scale * (m.rows.row(k) - diag_cos[k] * v.rows.row(k)) / v.norms[k];
  }
  return out;
}

LossGrads mse_loss(const AlignmentBatch& batch) {
  check_batch(batch);
  const double b = static_cast<double>(batch.size());
  const Mat diff = batch.m - batch.v;
  LossGrads out;
  out.loss = diff.array().square().sum() / b;
  out.d_m = 2.0 * diff / b;
  out.d_v = -out.d_m;
  out.d_log_tau = 0.0;
  return out;
}

LossGrads hybrid_loss(const AlignmentBatch& batch, const AlignmentHead& head, double mse_weight) {
  LossGrads out = align_loss(batch, head);
  if (mse_weight == 0.0) return out;
  const LossGrads mse = mse_loss(batch);
  out.loss += mse_weight * mse.loss;
  out.d_m += mse_weight * mse.d_m;
  out.d_v += mse_weight * mse.d_v;
  return out;
}

double grad_check(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& analytic,
                  double eps) {
  if (eps < 1e-7 || eps > 1e-3) throw input_error("grad_check: eps must lie in [1e-7, 1e-3]");
  if (analytic.size() != x.size()) throw input_error("grad_check: gradient size mismatch");

  double max_err = 0.0;
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = f(probe);
    probe[i] = x[i] - eps;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw input_error("grad_check: non-finite loss during probing");
    const double fd = (up - down) / (2.0 * eps);
    const double a = analytic[i];
    const double err = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
    max_err = std::max(max_err, err);
  }
  return max_err;
}

Vec visual_delta(const Mat& feat_next, const Mat& feat_prev) {
  if (feat_next.rows() != feat_prev.rows() || feat_next.cols() != feat_prev.cols())
    throw input_error("visual_delta: feature grid shapes differ");
  if (feat_next.rows() == 0) throw input_error("visual_delta: empty grids");
  return (feat_next - feat_prev).colwise().mean();
}

Mat host_feature_grid(const FrameBuffer& frame, int patch) {
  if (patch <= 0 || frame.width % (2 * patch) != 0 || frame.height % (2 * patch) != 0)
    throw input_error("host features: dimensions must divide by 2 * patch");

  const int c = frame.channels;
  const int fx = frame.width / patch;
  const int fy = frame.height / patch;
  const int d_v = 6 * c;

  // Per-channel patch means at the fine and coarse (2x) scale.
  auto patch_means = [&](int size, int gx) {
    Mat means(static_cast<Eigen::Index>(gx) * (frame.height / size), c);
    for (int ty = 0; ty < frame.height / size; ++ty) {
      for (int tx = 0; tx < gx; ++tx) {
        for (int ch = 0; ch < c; ++ch) {
          long sum = 0;
          for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
              sum += frame.at(tx * size + x, ty * size + y, ch);
          means(static_cast<Eigen::Index>(ty) * gx + tx, ch) =
              static_cast<double>(sum) / (static_cast<double>(size) * size);
        }
      }
    }
    return means;
  };
  const Mat fine = patch_means(patch, fx);
  const Mat coarse = patch_means(2 * patch, fx / 2);

  Mat grid(static_cast<Eigen::Index>(fx) * fy, d_v);
  for (int ty = 0; ty < fy; ++ty) {
    for (int tx = 0; tx < fx; ++tx) {
      const Eigen::Index pos = static_cast<Eigen::Index>(ty) * fx + tx;
      const double cx = 2.0 * ((tx + 0.5) * patch) / frame.width - 1.0;
      const double cy = 2.0 * ((ty + 0.5) * patch) / frame.height - 1.0;
      const Eigen::Index coarse_pos = static_cast<Eigen::Index>(ty / 2) * (fx / 2) + tx / 2;
      for (int ch = 0; ch < c; ++ch) {
        const double mf = fine(pos, ch);
        const double mc = coarse(coarse_pos, ch);
        grid(pos, 6 * ch + 0) = mf;
        grid(pos, 6 * ch + 1) = mf * cx;
        grid(pos, 6 * ch + 2) = mf * cy;
        grid(pos, 6 * ch + 3) = mc;
        grid(pos, 6 * ch + 4) = mc * cx;
        grid(pos, 6 * ch + 5) = mc * cy;
      }
    }
  }
  return grid;
}

}  // namespace tristream
