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

#include "crisistune/lora.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "crisistune/simd/kernels.hpp"

namespace crisistune {

std::string_view to_string(AdaptationTarget t) noexcept {
  return t == AdaptationTarget::kQkvo ? "QKVO" : "ALL_LINEAR";
}

std::optional<AdaptationTarget> adaptation_target_from_string(std::string_view s) noexcept {
  if (s == "QKVO" || s == "qkvo") return AdaptationTarget::kQkvo;
  if (s == "ALL_LINEAR" || s == "all_linear") return AdaptationTarget::kAllLinear;
  return std::nullopt;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("Matrix: expected " + std::to_string(rows * cols) +
                                " values, got " + std::to_string(data_.size()));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::gaussian(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.data_) v = dist(rng);
  return m;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) {
    throw std::invalid_argument("matvec: matrix has " + std::to_string(m.cols()) +
                                " columns, vector has " + std::to_string(x.size()));
  }
  std::vector<double> y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = simd::dot(m.row(i), x);
  return y;
}

std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> g) {
  if (g.size() != m.rows()) {
    throw std::invalid_argument("matvec_transposed: matrix has " + std::to_string(m.rows()) +
                                " rows, vector has " + std::to_string(g.size()));
  }
  std::vector<double> y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) simd::axpy(g[i], m.row(i), y);
  return y;
}

LoraLayer::LoraLayer(Matrix w, std::size_t rank, std::uint64_t seed)
    : LoraLayer(w, Matrix::gaussian(rank, w.cols(), 1.0 / std::sqrt(static_cast<double>(w.cols())), seed),
                Matrix(w.rows(), rank)) {}

LoraLayer::LoraLayer(Matrix w, Matrix a, Matrix b, RankPolicy policy)
    : w_(std::move(w)), a_(std::move(a)), b_(std::move(b)) {
  const std::size_t r = a_.rows();
  if (r == 0) throw std::invalid_argument("LoraLayer: rank must be positive");
  if (a_.cols() != w_.cols()) {
    throw std::invalid_argument("LoraLayer: A must be r x d_in");
  }
  if (b_.rows() != w_.rows() || b_.cols() != r) {
    throw std::invalid_argument("LoraLayer: B must be d_out x r");
  }
  const std::size_t limit = std::min(w_.rows(), w_.cols());
  const bool ok = policy == RankPolicy::kStrict ? r < limit : r <= limit;
  if (!ok) {
    throw std::invalid_argument("LoraLayer: rank " + std::to_string(r) +
                                " too large for a " + std::to_string(w_.rows()) + "x" +
                                std::to_string(w_.cols()) + " weight");
  }
}

std::vector<double> LoraLayer::forward(std::span<const double> x) const {
  std::vector<double> y = matvec(w_, x);
  const std::vector<double> u = matvec(a_, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += simd::dot(b_.row(i), u);
  return y;
}

Matrix LoraLayer::effective_weight() const {
  Matrix out = w_;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t k = 0; k < rank(); ++k) simd::axpy(b_(i, k), a_.row(k), out.row(i));
  }
  return out;
}

ParamCount param_count(std::uint64_t d_in, std::uint64_t d_out, std::uint64_t rank) {
  if (d_in == 0 || d_out == 0 || rank == 0) {
    throw std::invalid_argument("param_count: dimensions must be positive");
  }
  ParamCount pc;
  pc.trainable = rank * (d_in + d_out);
  pc.full = d_in * d_out;
  pc.ratio = static_cast<double>(pc.trainable) / static_cast<double>(pc.full);
  return pc;
}

namespace {

// Numerically stable -log softmax(z)[label]; writes softmax(z) into probs.
double softmax_xent(std::span<const double> z, std::size_t label, std::vector<double>& probs) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  probs.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] - zmax);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return std::log(sum) + zmax - z[label];
}

void check_sample(const LoraLayer& layer, const LabeledSample& s) {
  if (s.label >= layer.d_out()) {
    throw std::invalid_argument("sample label " + std::to_string(s.label) +
                                " out of range for " + std::to_string(layer.d_out()) +
                                " outputs");
  }
}

}  // namespace

double cross_entropy_loss(const LoraLayer& layer, std::span<const LabeledSample> batch) {
  if (batch.empty()) throw std::invalid_argument("cross_entropy_loss: empty batch");
  std::vector<double> probs;
  double total = 0.0;
  for (const auto& s : batch) {
    check_sample(layer, s);
    total += softmax_xent(layer.forward(s.x), s.label, probs);
  }
  return total / static_cast<double>(batch.size());
}

double loss_and_gradients(const LoraLayer& layer, std::span<const LabeledSample> batch,
                          LoraGradients& grads) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  grads.d_a = Matrix(layer.rank(), layer.d_in());
  grads.d_b = Matrix(layer.d_out(), layer.rank());
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  std::vector<double> probs;
  double total = 0.0;
  for (const auto& s : batch) {
    check_sample(layer, s);
    const std::vector<double> u = matvec(layer.a(), s.x);
    std::vector<double> z = matvec(layer.w(), s.x);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += simd::dot(layer.b().row(i), u);

    total += softmax_xent(z, s.label, probs);
    std::vector<double>& g = probs;  // dLoss/dz = (softmax - onehot) / n
    g[s.label] -= 1.0;
    for (double& v : g) v *= inv_n;

    for (std::size_t i = 0; i < g.size(); ++i) simd::axpy(g[i], u, grads.d_b.row(i));
    const std::vector<double> v = matvec_transposed(layer.b(), g);
    for (std::size_t k = 0; k < v.size(); ++k) simd::axpy(v[k], s.x, grads.d_a.row(k));
  }
  return total * inv_n;
}

void validate(const TrainConfig& config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (config.steps == 0) throw std::invalid_argument("steps must be positive");
  if (std::find(config.rank_grid.begin(), config.rank_grid.end(), config.rank) ==
      config.rank_grid.end()) {
    throw std::invalid_argument("rank " + std::to_string(config.rank) +
                                " is not in the configured rank grid");
  }
}

std::vector<double> train_toy(LoraLayer& layer, std::span<const LabeledSample> dataset,
                              const TrainConfig& config) {
  validate(config);
  if (layer.rank() != config.rank) {
    throw std::invalid_argument("layer rank " + std::to_string(layer.rank()) +
                                " differs from configured rank " + std::to_string(config.rank));
  }
  std::vector<double> trajectory;
  trajectory.reserve(config.steps + 1);
  LoraGradients grads;
  for (std::size_t step = 0; step <= config.steps; ++step) {
    const double loss = step < config.steps ? loss_and_gradients(layer, dataset, grads)
                                            : cross_entropy_loss(layer, dataset);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("train_toy: non-finite loss " + std::to_string(loss) +
                               " at step " + std::to_string(step) +
                               " (learning_rate=" + std::to_string(config.learning_rate) + ")");
    }
    trajectory.push_back(loss);
    if (step == config.steps) break;
    simd::axpy(-config.learning_rate, grads.d_a.data(), layer.a().data());
    simd::axpy(-config.learning_rate, grads.d_b.data(), layer.b().data());
  }
  return trajectory;
}

GradCheckReport grad_check(const LoraLayer& layer, const LabeledSample& sample, double step,
                           double floor) {
  const std::span<const LabeledSample> one(&sample, 1);
  LoraGradients grads;
  loss_and_gradients(layer, one, grads);

  GradCheckReport report;
  LoraLayer probe = layer;
  auto check = [&](Matrix& param, const Matrix& analytic) {
    double diff_sq = 0.0, g_sq = 0.0, fd_sq = 0.0;
    for (std::size_t i = 0; i < param.rows(); ++i) {
      for (std::size_t j = 0; j < param.cols(); ++j) {
        const double saved = param(i, j);
        param(i, j) = saved + step;
        const double plus = cross_entropy_loss(probe, one);
        param(i, j) = saved - step;
        const double minus = cross_entropy_loss(probe, one);
        param(i, j) = saved;

        const double fd = (plus - minus) / (2.0 * step);
        const double g = analytic(i, j);
        const double abs_err = std::abs(g - fd);
        diff_sq += abs_err * abs_err;
        g_sq += g * g;
        fd_sq += fd * fd;
        report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
        report.max_entry_relative_error =
            std::max(report.max_entry_relative_error,
                     abs_err / std::max({std::abs(g), std::abs(fd), floor}));
        ++report.entries_checked;
      }
    }
    const double denom = std::max(std::sqrt(g_sq) + std::sqrt(fd_sq), floor);
    report.max_relative_error = std::max(report.max_relative_error, std::sqrt(diff_sq) / denom);
  };
  check(probe.a(), grads.d_a);
  check(probe.b(), grads.d_b);
  return report;
}

ToyProblem make_toy_problem(std::uint64_t seed, std::size_t classes, std::size_t d_in,
                            std::size_t per_class) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const Matrix centers = Matrix::gaussian(classes, d_in, 1.0, seed ^ 0x9e3779b97f4a7c15ULL);

  ToyProblem p;
  p.w = Matrix::gaussian(classes, d_in, 0.1, seed + 1);
  p.dataset.reserve(classes * per_class);
  for (std::size_t k = 0; k < per_class; ++k) {
    for (std::size_t c = 0; c < classes; ++c) {
      LabeledSample s;
      s.label = c;
      s.x.resize(d_in);
      for (std::size_t j = 0; j < d_in; ++j) s.x[j] = 2.0 * centers(c, j) + 0.3 * unit(rng);
      p.dataset.push_back(std::move(s));
    }
  }
  return p;
}

GradCheckCase make_grad_check_case(std::uint64_t seed) {
  constexpr std::size_t kIn = 8, kOut = 6, kRank = 3;
  Matrix w = Matrix::gaussian(kOut, kIn, 0.5, seed * 4 + 1);
  Matrix a = Matrix::gaussian(kRank, kIn, 0.5, seed * 4 + 2);
  Matrix b = Matrix::gaussian(kOut, kRank, 0.5, seed * 4 + 3);
  const Matrix x = Matrix::gaussian(1, kIn, 1.0, seed * 4 + 4);
  LabeledSample sample;
  sample.x.assign(x.data().begin(), x.data().end());
  sample.label = static_cast<std::size_t>(seed % kOut);
  return {LoraLayer(std::move(w), std::move(a), std::move(b)), std::move(sample)};
}

}  // namespace crisistune
