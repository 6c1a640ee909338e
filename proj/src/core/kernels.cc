// Copyright 2026 The confparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "confparse/core/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace confparse {
namespace kernels {
namespace {

// Four independent partial sums; the order is fixed so results are
// reproducible, and the compiler can keep them in vector registers.
inline double dot_unrolled(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void check_matvec(const Mat& w, std::size_t x, std::size_t out, const char* who) {
  if (w.cols() != x || w.rows() != out) {
    throw Error(std::string(who) + ": dimension mismatch (" +
                std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                " with " + std::to_string(x) + " -> " + std::to_string(out) + ")");
  }
}

}  // namespace

void matvec(const Mat& w, std::span<const double> x, std::span<double> out) {
  check_matvec(w, x.size(), out.size(), "matvec");
  const long rows = static_cast<long>(w.rows());
  const std::size_t cols = w.cols();
  const double* wp = w.flat().data();
#pragma omp parallel for schedule(static) if (w.size() >= kParallelThreshold)
  for (long i = 0; i < rows; ++i) {
    out[i] = dot_unrolled(wp + i * cols, x.data(), cols);
  }
}

void matvec_acc(const Mat& w, std::span<const double> x, std::span<double> out) {
  check_matvec(w, x.size(), out.size(), "matvec_acc");
  const long rows = static_cast<long>(w.rows());
  const std::size_t cols = w.cols();
  const double* wp = w.flat().data();
#pragma omp parallel for schedule(static) if (w.size() >= kParallelThreshold)
  for (long i = 0; i < rows; ++i) {
    out[i] += dot_unrolled(wp + i * cols, x.data(), cols);
  }
}

void matvec_transpose_acc(const Mat& w, std::span<const double> dz,
                          std::span<double> dx) {
  check_matvec(w, dx.size(), dz.size(), "matvec_transpose_acc");
  const std::size_t rows = w.rows();
  const long cols = static_cast<long>(w.cols());
  const double* wp = w.flat().data();
  if (w.size() < kParallelThreshold) {
    for (std::size_t i = 0; i < rows; ++i) {
      if (dz[i] != 0.0) axpy(dz[i], wp + i * cols, dx.data(), cols);
    }
    return;
  }
  // Column blocks per thread; every dx[j] still sums over i in order.
  constexpr long kBlock = 64;
  const long blocks = (cols + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (long blk = 0; blk < blocks; ++blk) {
    const long lo = blk * kBlock;
    const long n = std::min(kBlock, cols - lo);
    for (std::size_t i = 0; i < rows; ++i) {
      if (dz[i] != 0.0) axpy(dz[i], wp + i * cols + lo, dx.data() + lo, n);
    }
  }
}

void outer_acc(Mat& dw, std::span<const double> dz, std::span<const double> x) {
  check_matvec(dw, x.size(), dz.size(), "outer_acc");
  const long rows = static_cast<long>(dw.rows());
  const std::size_t cols = dw.cols();
  double* wp = dw.flat().data();
#pragma omp parallel for schedule(static) if (dw.size() >= kParallelThreshold)
  for (long i = 0; i < rows; ++i) {
    if (dz[i] != 0.0) axpy(dz[i], x.data(), wp + i * cols, cols);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  return dot_unrolled(a.data(), b.data(), a.size());
}

namespace reference {

void matvec(const Mat& w, std::span<const double> x, std::span<double> out) {
  check_matvec(w, x.size(), out.size(), "reference::matvec");
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) s += w(i, j) * x[j];
    out[i] = s;
  }
}

void matvec_acc(const Mat& w, std::span<const double> x, std::span<double> out) {
  check_matvec(w, x.size(), out.size(), "reference::matvec_acc");
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) s += w(i, j) * x[j];
    out[i] += s;
  }
}

void matvec_transpose_acc(const Mat& w, std::span<const double> dz,
                          std::span<double> dx) {
  check_matvec(w, dx.size(), dz.size(), "reference::matvec_transpose_acc");
  for (std::size_t j = 0; j < w.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) s += w(i, j) * dz[i];
    dx[j] += s;
  }
}

void outer_acc(Mat& dw, std::span<const double> dz, std::span<const double> x) {
  check_matvec(dw, x.size(), dz.size(), "reference::outer_acc");
  for (std::size_t i = 0; i < dw.rows(); ++i)
    for (std::size_t j = 0; j < dw.cols(); ++j) dw(i, j) += dz[i] * x[j];
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "reference::dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace reference
}  // namespace kernels

Vec affine(const Mat& w, std::span<const double> x, std::span<const double> b) {
  require(b.empty() || b.size() == w.rows(), "affine: bias dimension mismatch");
  Vec z(w.rows());
  kernels::matvec(w, x, z);
  for (std::size_t i = 0; i < b.size(); ++i) z[i] += b[i];
  return z;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec pointwise(Nonlinearity f, std::span<const double> x) {
  Vec z(x.size());
  if (f == Nonlinearity::kSigmoid) {
    std::transform(x.begin(), x.end(), z.begin(), [](double v) { return sigmoid(v); });
  } else {
    std::transform(x.begin(), x.end(), z.begin(), [](double v) { return std::tanh(v); });
  }
  return z;
}

Vec softmax(std::span<const double> x) {
  Vec z(x.size());
  if (x.empty()) return z;
  const double mx = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = std::exp(x[i] - mx);
    total += z[i];
  }
  for (double& v : z) v /= total;
  return z;
}

Vec gaussian_perturb(std::span<const double> v, double sigma, NoiseMode mode,
                     RngStream& rng) {
  require(sigma >= 0.0, "gaussian_perturb: sigma must be >= 0");
  Vec out(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double g = sigma * rng.normal();
    out[i] = mode == NoiseMode::kAdditive ? v[i] + g : v[i] + v[i] * g;
  }
  return out;
}

Vec dropout_mask(double p, std::size_t size, RngStream& rng) {
  require(p >= 0.0 && p < 1.0, "dropout_mask: rate must be in [0, 1)");
  Vec mask(size, 1.0);
  if (p == 0.0) return mask;
  const double keep = 1.0 / (1.0 - p);
  for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep;
  return mask;
}

}  // namespace confparse
