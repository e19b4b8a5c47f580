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
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "sdlab/kernels/kernels.hpp"

namespace sdlab::kernels {
namespace {

bool CpuHasAvx2() {
#if defined(SDLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* PickDefault() {
  if (const char* env = std::getenv("SDLAB_KERNELS"); env && *env) {
    std::string_view name(env);
    if (name != "auto") {
      const KernelTable* t = table_for(parse_backend(name));
      if (!t) {
        throw std::runtime_error("SDLAB_KERNELS=" + std::string(name) +
                                 " is not available on this machine");
      }
      return t;
    }
  }
  const auto all = available_backends();
  return table_for(all.back());
}

std::atomic<const KernelTable*>& Slot() {
  static std::atomic<const KernelTable*> slot{PickDefault()};
  return slot;
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::kScalar;
  if (name == "avx2") return Backend::kAvx2;
  if (name == "neon") return Backend::kNeon;
  throw std::invalid_argument("unknown kernel backend '" + std::string(name) +
                              "'");
}

const KernelTable& scalar_table() { return detail::scalar_kernels(); }

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &detail::scalar_kernels();
    case Backend::kAvx2:
#if defined(SDLAB_HAVE_AVX2)
      if (CpuHasAvx2()) return &detail::avx2_kernels();
#endif
      return nullptr;
    case Backend::kNeon:
#if defined(SDLAB_HAVE_NEON)
      return &detail::neon_kernels();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::kScalar};
  for (Backend b : {Backend::kAvx2, Backend::kNeon}) {
    if (table_for(b)) out.push_back(b);
  }
  return out;
}

const KernelTable& active() {
  return *Slot().load(std::memory_order_relaxed);
}

void select(Backend b) {
  const KernelTable* t = table_for(b);
  if (!t) {
    throw std::runtime_error("kernel backend '" + std::string(to_string(b)) +
                             "' is not available");
  }
  Slot().store(t, std::memory_order_relaxed);
}

Backend active_backend() { return active().backend; }

}  // namespace sdlab::kernels
