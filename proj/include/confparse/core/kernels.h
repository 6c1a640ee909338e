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

#ifndef CONFPARSE_CORE_KERNELS_H_
#define CONFPARSE_CORE_KERNELS_H_

#include <span>

#include "confparse/core/tensor.h"

namespace confparse {

// Dense kernels used by the forward and backward passes. The default
// versions split rows across OpenMP threads once the matrix is large enough
// to amortise the fork; each output element is still reduced by a single
// thread, so results do not depend on the thread count.
namespace kernels {

// Matrices with fewer entries than this run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

// out = W x  (overwrites out)
void matvec(const Mat& w, std::span<const double> x, std::span<double> out);
// out += W x
void matvec_acc(const Mat& w, std::span<const double> x, std::span<double> out);
// dx += W^T dz
void matvec_transpose_acc(const Mat& w, std::span<const double> dz,
                          std::span<double> dx);
// dw += dz x^T
void outer_acc(Mat& dw, std::span<const double> dz, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

// Plain loops with the textbook summation order; the optimised kernels are
// tested against these.
namespace reference {
void matvec(const Mat& w, std::span<const double> x, std::span<double> out);
void matvec_acc(const Mat& w, std::span<const double> x, std::span<double> out);
void matvec_transpose_acc(const Mat& w, std::span<const double> dz,
                          std::span<double> dx);
void outer_acc(Mat& dw, std::span<const double> dz, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace reference

}  // namespace kernels

enum class Nonlinearity { kSigmoid, kTanh };
enum class NoiseMode { kAdditive, kMultiplicative };

// z = W x + b. An empty bias means no bias.
Vec affine(const Mat& w, std::span<const double> x, std::span<const double> b = {});
Vec pointwise(Nonlinearity f, std::span<const double> x);
double sigmoid(double x);
// Max-shifted softmax.
Vec softmax(std::span<const double> x);

// additive: v + g, multiplicative: v + v*g, with g ~ N(0, sigma^2 I).
Vec gaussian_perturb(std::span<const double> v, double sigma, NoiseMode mode,
                     RngStream& rng);
// Inverted-dropout mask: 0 with probability p, 1/(1-p) otherwise.
Vec dropout_mask(double p, std::size_t size, RngStream& rng);

}  // namespace confparse

#endif  // CONFPARSE_CORE_KERNELS_H_
