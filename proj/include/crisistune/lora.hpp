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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace crisistune {

// Which layers of a foundation model a checkpoint's LoRA training adapted.
// Metadata only; recorded in experiment manifests.
enum class AdaptationTarget {
  kQkvo,       // attention Q, K, V, O projections
  kAllLinear,  // QKVO plus down/up projections and the LM head
};

std::string_view to_string(AdaptationTarget t) noexcept;
std::optional<AdaptationTarget> adaptation_target_from_string(std::string_view s) noexcept;

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  // Entries drawn from N(0, stddev^2) with a seeded generator.
  static Matrix gaussian(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = M x. Throws std::invalid_argument on a size mismatch.
std::vector<double> matvec(const Matrix& m, std::span<const double> x);
// y = M^T g.
std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> g);

enum class RankPolicy {
  kStrict,         // rank < min(d_in, d_out)
  kAllowFullRank,  // rank <= min(d_in, d_out); only for degenerate checks
};

// Frozen W (d_out x d_in) plus trainable A (r x d_in) and B (d_out x r);
// the effective weight is W + B A.
class LoraLayer {
 public:
  // A ~ N(0, 1/d_in), B = 0: the layer starts exactly at W.
  LoraLayer(Matrix w, std::size_t rank, std::uint64_t seed);
  LoraLayer(Matrix w, Matrix a, Matrix b, RankPolicy policy = RankPolicy::kStrict);

  std::size_t d_in() const noexcept { return w_.cols(); }
  std::size_t d_out() const noexcept { return w_.rows(); }
  std::size_t rank() const noexcept { return a_.rows(); }

  const Matrix& w() const noexcept { return w_; }
  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  Matrix& a() noexcept { return a_; }
  Matrix& b() noexcept { return b_; }

  // W x + B (A x). Throws std::invalid_argument if x.size() != d_in.
  std::vector<double> forward(std::span<const double> x) const;
  // Dense W + B A.
  Matrix effective_weight() const;

  std::size_t trainable_parameters() const noexcept { return rank() * (d_in() + d_out()); }

 private:
  Matrix w_;
  Matrix a_;
  Matrix b_;
};

struct ParamCount {
  std::uint64_t trainable = 0;  // r (d_in + d_out)
  std::uint64_t full = 0;       // d_in d_out
  double ratio = 0.0;           // trainable / full
};
ParamCount param_count(std::uint64_t d_in, std::uint64_t d_out, std::uint64_t rank);

struct LabeledSample {
  std::vector<double> x;
  std::size_t label = 0;
};

struct LoraGradients {
  Matrix d_a;
  Matrix d_b;
};

// Mean softmax cross-entropy with logits = forward(x).
double cross_entropy_loss(const LoraLayer& layer, std::span<const LabeledSample> batch);

// Loss and analytic gradients with respect to A and B (W receives none).
double loss_and_gradients(const LoraLayer& layer, std::span<const LabeledSample> batch,
                          LoraGradients& grads);

inline constexpr std::size_t kDefaultRankGrid[] = {8, 16, 32, 64};

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t steps = 200;
  std::size_t rank = 8;
  std::vector<std::size_t> rank_grid{std::begin(kDefaultRankGrid), std::end(kDefaultRankGrid)};
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument if the rank is not in the grid or other
// fields are out of range.
void validate(const TrainConfig& config);

// Full-batch gradient descent on A and B. Returns the loss before every step
// followed by the final loss (steps + 1 values). Throws std::runtime_error
// with the step number if the loss becomes non-finite.
std::vector<double> train_toy(LoraLayer& layer, std::span<const LabeledSample> dataset,
                              const TrainConfig& config);

struct GradCheckReport {
  // max over {A, B} of ||g - fd|| / max(||g|| + ||fd||, floor)
  double max_relative_error = 0.0;
  // max over entries of |g - fd| / max(|g|, |fd|, floor); dominated by
  // finite-difference noise wherever a gradient entry is close to zero
  double max_entry_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t entries_checked = 0;
};

// Compares analytic dLoss/dA and dLoss/dB for one sample with central finite
// differences.
GradCheckReport grad_check(const LoraLayer& layer, const LabeledSample& sample,
                           double step = 1e-5, double floor = 1e-8);

// Separable multi-class toy task plus a random frozen W sized for it.
struct ToyProblem {
  Matrix w;
  std::vector<LabeledSample> dataset;
};
ToyProblem make_toy_problem(std::uint64_t seed, std::size_t classes = 10, std::size_t d_in = 16,
                            std::size_t per_class = 20);

// A small layer (d_in 8, d_out 6, rank 3) with non-zero A and B, and one
// sample, for finite-difference checks.
struct GradCheckCase {
  LoraLayer layer;
  LabeledSample sample;
};
GradCheckCase make_grad_check_case(std::uint64_t seed);

}  // namespace crisistune
