// Copyright 2026 The sdlab Authors
// SPDX-License-Identifier: Apache-2.0
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
// AArch64 NEON variants, two doubles per lane group.

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "sdlab/kernels/kernels.hpp"

namespace sdlab::kernels::detail {
namespace {

double Dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double Sum(const double* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(x + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double Max(const double* x, std::size_t n) {
  std::size_t i = 0;
  double m = x[0];
  if (n >= 2) {
    float64x2_t acc = vld1q_f64(x);
    for (i = 2; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vld1q_f64(x + i));
    m = vmaxvq_f64(acc);
  }
  for (; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

void Axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void Scale(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double SumMin(const double* p, const double* q, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vminq_f64(vld1q_f64(p + i), vld1q_f64(q + i)));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::min(p[i], q[i]);
  return s;
}

double PositivePart(const double* p, const double* q, double* out,
                    std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  float64x2_t acc = zero;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vmaxq_f64(zero, vsubq_f64(vld1q_f64(p + i), vld1q_f64(q + i)));
    vst1q_f64(out + i, d);
    acc = vaddq_f64(acc, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    out[i] = std::max(0.0, p[i] - q[i]);
    s += out[i];
  }
  return s;
}

void SoftmaxInplace(double* x, std::size_t n, double inv_tau) {
  const double m = Max(x, n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp((x[i] - m) * inv_tau);
  Scale(1.0 / Sum(x, n), x, n);
}

void Gemv(const double* w, const double* x, const double* b, double* y,
          std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = (b ? b[r] : 0.0) + Dot(w + r * cols, x, cols);
  }
}

void GemvTAcc(const double* w, const double* dy, double* dx, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) Axpy(dy[r], w + r * cols, dx, cols);
}

void OuterAcc(double s, const double* u, const double* v, double* m,
              std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) Axpy(s * u[r], v, m + r * cols, cols);
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{
      Backend::kNeon, Dot,          Sum,            Max,
      Axpy,           Scale,        SumMin,         PositivePart,
      SoftmaxInplace, Gemv,         GemvTAcc,       OuterAcc,
  };
  return table;
}

}  // namespace sdlab::kernels::detail
