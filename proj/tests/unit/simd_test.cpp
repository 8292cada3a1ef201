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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "crisistune/simd/kernels.hpp"

namespace crisistune::simd {
namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

using DotFn = double (*)(std::span<const double>, std::span<const double>) noexcept;
using AxpyFn = void (*)(double, std::span<const double>, std::span<double>) noexcept;

void check_equivalence(DotFn dot_v, AxpyFn axpy_v) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 0; n <= 67; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = random_vec(rng, n), b = random_vec(rng, n);
      double mag = 0;
      for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]);
      EXPECT_NEAR(dot_v(a, b), dot_scalar(a, b), 1e-13 * (mag + 1)) << "n=" << n;

      auto y1 = random_vec(rng, n);
      auto y2 = y1;
      const double alpha = std::uniform_real_distribution<double>(-3, 3)(rng);
      axpy_scalar(alpha, a, y1);
      axpy_v(alpha, a, y2);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(y1[i], y2[i], 1e-12 * (std::fabs(y1[i]) + 1)) << "n=" << n << " i=" << i;
      }
    }
  }
}

TEST(Simd, ScalarReference) {
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
  EXPECT_EQ(dot_scalar(a, b), 12.0);
  std::vector<double> y{1, 1, 1};
  axpy_scalar(2.0, a, y);
  EXPECT_EQ(y, (std::vector<double>{3, 5, 7}));
  EXPECT_EQ(dot_scalar({}, {}), 0.0);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST(Simd, Avx2MatchesScalar) {
  if (!isa_available(Isa::kAvx2)) GTEST_SKIP() << "AVX2/FMA not available";
  check_equivalence(&dot_avx2, &axpy_avx2);
}
#endif

#if defined(__aarch64__)
TEST(Simd, NeonMatchesScalar) {
  if (!isa_available(Isa::kNeon)) GTEST_SKIP() << "NEON not available";
  check_equivalence(&dot_neon, &axpy_neon);
}
#endif

TEST(Simd, DispatchSwitching) {
  const Isa before = active_isa();
  EXPECT_TRUE(isa_available(Isa::kScalar));
  EXPECT_TRUE(isa_available(detect_isa()));
  ASSERT_TRUE(set_active_isa(Isa::kScalar));
  EXPECT_EQ(active_isa(), Isa::kScalar);
  std::mt19937_64 rng(3);
  const auto a = random_vec(rng, 33), b = random_vec(rng, 33);
  EXPECT_EQ(dot(a, b), dot_scalar(a, b));
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (!isa_available(isa)) {
      EXPECT_FALSE(set_active_isa(isa));
    }
  }
  EXPECT_EQ(active_isa(), Isa::kScalar);
  set_active_isa(before);
  EXPECT_EQ(to_string(Isa::kAvx2), "avx2");
}

}  // namespace
}  // namespace crisistune::simd
