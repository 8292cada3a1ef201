// Copyright 2026 The crisistune Authors.
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

#include <span>
#include <string_view>

// Dense double-precision kernels behind the LoRA layer. Every kernel has a
// scalar reference implementation plus vector variants; the variant used by
// dot()/axpy() is picked once at runtime from the CPU's capabilities.

namespace crisistune::simd {

enum class Isa {
  kScalar,
  kAvx2,  // AVX2 + FMA, x86-64
  kNeon,  // AdvSIMD, aarch64
};

std::string_view to_string(Isa isa) noexcept;

// Best ISA this CPU supports among the compiled-in variants.
Isa detect_isa() noexcept;
bool isa_available(Isa isa) noexcept;

// Currently dispatched ISA. Defaults to detect_isa(), or kScalar when the
// CRISISTUNE_SIMD environment variable is "scalar".
Isa active_isa() noexcept;

// Forces a variant (tests, benchmarks). Returns false and leaves the current
// choice untouched if the ISA is unavailable.
bool set_active_isa(Isa isa) noexcept;

// sum_i a[i] * b[i]; sizes must match.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
// y[i] += alpha * x[i]; sizes must match.
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

// Reference implementations, always available.
double dot_scalar(std::span<const double> a, std::span<const double> b) noexcept;
void axpy_scalar(double alpha, std::span<const double> x, std::span<double> y) noexcept;

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(std::span<const double> a, std::span<const double> b) noexcept;
void axpy_avx2(double alpha, std::span<const double> x, std::span<double> y) noexcept;
#endif

#if defined(__aarch64__)
double dot_neon(std::span<const double> a, std::span<const double> b) noexcept;
void axpy_neon(double alpha, std::span<const double> x, std::span<double> y) noexcept;
#endif

}  // namespace crisistune::simd
