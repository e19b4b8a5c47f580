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

#pragma once

// Data-parallel inner loops shared by the models, the softmax and the
// speculative verifier. Every kernel has a scalar reference implementation;
// SIMD variants (AVX2+FMA on x86-64, NEON on AArch64) are compiled into
// separate translation units and chosen once at runtime.
//
// All matrices are row-major doubles.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sdlab::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view to_string(Backend b);
// Accepts "scalar", "avx2", "neon". Throws std::invalid_argument otherwise.
Backend parse_backend(std::string_view name);

struct KernelTable {
  Backend backend;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);  // n >= 1
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x *= a
  void (*scale)(double a, double* x, std::size_t n);
  // Σ min(p[i], q[i])
  double (*sum_min)(const double* p, const double* q, std::size_t n);
  // out[i] = max(0, p[i] - q[i]); returns Σ out
  double (*positive_part)(const double* p, const double* q, double* out,
                          std::size_t n);
  // x[i] = exp((x[i] - max(x)) * inv_tau) / Σ; exp stays scalar libm in all
  // backends so only the reductions differ between them.
  void (*softmax_inplace)(double* x, std::size_t n, double inv_tau);
  // y = W x + b, W is rows x cols. b may be null.
  void (*gemv)(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols);
  // dx += W^T dy, W is rows x cols
  void (*gemv_t_acc)(const double* w, const double* dy, double* dx,
                     std::size_t rows, std::size_t cols);
  // M += s * u v^T, M is rows x cols
  void (*outer_acc)(double s, const double* u, const double* v, double* m,
                    std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_table();
// Null when the backend was not compiled in or the CPU lacks the features.
const KernelTable* table_for(Backend b);
std::vector<Backend> available_backends();

// The process-wide table. Initialized on first use from SDLAB_KERNELS
// ("scalar" | "avx2" | "neon" | "auto"), otherwise the widest available.
const KernelTable& active();
// Throws std::runtime_error when the backend is unavailable. Not thread-safe
// with respect to concurrent kernel calls; call before spawning workers.
void select(Backend b);
Backend active_backend();

// Span conveniences over active().
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> x) {
  return active().sum(x.data(), x.size());
}
inline double max(std::span<const double> x) {
  return active().max(x.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), y.size());
}
inline void scale(double a, std::span<double> x) {
  active().scale(a, x.data(), x.size());
}
inline double sum_min(std::span<const double> p, std::span<const double> q) {
  return active().sum_min(p.data(), q.data(), p.size());
}
inline double positive_part(std::span<const double> p,
                            std::span<const double> q, std::span<double> out) {
  return active().positive_part(p.data(), q.data(), out.data(), out.size());
}
inline void softmax_inplace(std::span<double> x, double inv_tau) {
  active().softmax_inplace(x.data(), x.size(), inv_tau);
}

namespace detail {
// Per-backend tables, defined in their own translation units.
const KernelTable& scalar_kernels();
#if defined(SDLAB_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(SDLAB_HAVE_NEON)
const KernelTable& neon_kernels();
#endif
}  // namespace detail

}  // namespace sdlab::kernels
