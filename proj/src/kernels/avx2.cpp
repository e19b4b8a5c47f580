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
// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "sdlab/kernels/kernels.hpp"

namespace sdlab::kernels::detail {
namespace {

inline double HSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double HMax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

double Dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = HSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double Sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double s = HSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double Max(const double* x, std::size_t n) {
  std::size_t i = 0;
  double m = x[0];
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    m = HMax(acc);
  }
  for (; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

void Axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void Scale(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

double SumMin(const double* p, const double* q, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_min_pd(_mm256_loadu_pd(p + i),
                                           _mm256_loadu_pd(q + i)));
  }
  double s = HSum(acc);
  for (; i < n; ++i) s += std::min(p[i], q[i]);
  return s;
}

double PositivePart(const double* p, const double* q, double* out,
                    std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_max_pd(
        zero, _mm256_sub_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(q + i)));
    _mm256_storeu_pd(out + i, d);
    acc = _mm256_add_pd(acc, d);
  }
  double s = HSum(acc);
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

const KernelTable& avx2_kernels() {
  static const KernelTable table{
      Backend::kAvx2, Dot,          Sum,            Max,
      Axpy,           Scale,        SumMin,         PositivePart,
      SoftmaxInplace, Gemv,         GemvTAcc,       OuterAcc,
  };
  return table;
}

}  // namespace sdlab::kernels::detail
