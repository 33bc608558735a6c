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

#pragma once

// Data-parallel inner loops used by the learner and the forecaster. Every
// kernel has a scalar reference implementation; wider variants are selected
// once at startup from the CPU features, or forced with APFETCH_ISA=scalar.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace apfetch::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
  // out[i] = x[i+25] - x[i+24] - x[i+1] + x[i] for i < n - 25
  void (*seasonal_difference)(const double* x, std::size_t n, double* out);
};

inline constexpr std::size_t kSeasonLag = 24;

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in.
const KernelTable* avx2_table();

bool isa_available(Isa isa);
Isa active_isa();
// Throws DomainError when the ISA is not available on this build/CPU.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
std::vector<double> seasonal_difference(std::span<const double> x);

}  // namespace apfetch::kernels
