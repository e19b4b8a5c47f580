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

#include <algorithm>
#include <cmath>

#include "sdlab/kernels/kernels.hpp"

namespace sdlab::kernels::detail {
namespace {

double Dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double Sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double Max(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

void Axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void Scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double SumMin(const double* p, const double* q, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::min(p[i], q[i]);
  return s;
}

double PositivePart(const double* p, const double* q, double* out,
                    std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::max(0.0, p[i] - q[i]);
    s += out[i];
  }
  return s;
}

void SoftmaxInplace(double* x, std::size_t n, double inv_tau) {
  const double m = Max(x, n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::exp((x[i] - m) * inv_tau);
    s += x[i];
  }
  Scale(1.0 / s, x, n);
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

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      Backend::kScalar, Dot,          Sum,            Max,
      Axpy,             Scale,        SumMin,         PositivePart,
      SoftmaxInplace,   Gemv,         GemvTAcc,       OuterAcc,
  };
  return table;
}

}  // namespace sdlab::kernels::detail
