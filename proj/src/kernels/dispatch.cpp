/*
 * Copyright 2026 The apfetch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <atomic>
#include <cstdlib>
#include <string>

#include "apfetch/errors.hpp"
#include "apfetch/kernels.hpp"

namespace apfetch::kernels {

#ifndef APFETCH_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(APFETCH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_table();
    case Isa::kAvx2:
      return cpu_has_avx2() ? avx2_table() : nullptr;
  }
  return nullptr;
}

Isa detect() {
  if (const char* env = std::getenv("APFETCH_ISA"); env != nullptr && std::string(env) == "scalar") {
    return Isa::kScalar;
  }
  return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

struct Active {
  std::atomic<const KernelTable*> table;
  std::atomic<Isa> isa;
  Active() {
    const Isa detected = detect();
    isa.store(detected);
    table.store(table_for(detected));
  }
};

Active& active() {
  static Active a;
  return a;
}

const KernelTable& current() { return *active().table.load(std::memory_order_relaxed); }

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw DomainError("kernel operands differ in length");
}

}  // namespace

bool isa_available(Isa isa) { return table_for(isa) != nullptr; }

Isa active_isa() { return active().isa.load(); }

void set_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) throw DomainError("kernel ISA not available: " + std::string(isa_name(isa)));
  active().table.store(t);
  active().isa.store(isa);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return current().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  current().axpy(alpha, x.data(), y.data(), x.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return current().max_abs_diff(a.data(), b.data(), a.size());
}

std::vector<double> seasonal_difference(std::span<const double> x) {
  if (x.size() < kSeasonLag + 2) throw DomainError("series too short for seasonal differencing");
  std::vector<double> out(x.size() - kSeasonLag - 1);
  current().seasonal_difference(x.data(), x.size(), out.data());
  return out;
}

}  // namespace apfetch::kernels
