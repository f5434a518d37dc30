/*
 * Copyright 2026 The v2gsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace v2g {

/// Stacked-LSTM dimensions. Defaults are the forecaster's production shape.
struct LstmShape {
  std::size_t input_dim = 3;
  std::size_t hidden = 32;
  std::size_t layers = 2;
  std::size_t output_dim = 2;

  [[nodiscard]] std::size_t layer_input(std::size_t layer) const { return layer == 0 ? input_dim : hidden; }
  [[nodiscard]] std::size_t layer_size(std::size_t layer) const {
    const std::size_t g = 4 * hidden;
    return g * layer_input(layer) + g * hidden + g;
  }
  [[nodiscard]] std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layers; ++l) n += layer_size(l);
    return n + output_dim * hidden + output_dim;
  }

  friend bool operator==(const LstmShape&, const LstmShape&) = default;
};

/// Flat parameter vector. Layout, in order:
///   for each layer l: W_ih (4H x in_l, row-major), W_hh (4H x H), b (4H)
///   head: W_out (O x H), b_out (O)
/// Gate rows are ordered input, forget, candidate, output.
struct LstmParams {
  LstmShape shape;
  std::uint64_t version = 0;
  std::vector<double> values;

  LstmParams() = default;
  explicit LstmParams(LstmShape s, std::uint64_t v = 0) : shape(s), version(v), values(s.param_count(), 0.0) {}

  [[nodiscard]] std::size_t w_ih_offset(std::size_t layer) const;
  [[nodiscard]] std::size_t w_hh_offset(std::size_t layer) const {
    return w_ih_offset(layer) + 4 * shape.hidden * shape.layer_input(layer);
  }
  [[nodiscard]] std::size_t bias_offset(std::size_t layer) const {
    return w_hh_offset(layer) + 4 * shape.hidden * shape.hidden;
  }
  [[nodiscard]] std::size_t head_w_offset() const { return w_ih_offset(shape.layers); }
  [[nodiscard]] std::size_t head_b_offset() const { return head_w_offset() + shape.output_dim * shape.hidden; }

  [[nodiscard]] bool all_finite() const;
  /// Throws std::invalid_argument on wrong size or non-finite entries.
  void check() const;
};

/// Uniform init in [-scale, scale] from a seed.
LstmParams random_params(const LstmShape& shape, std::uint64_t seed, double scale = 0.08);

/// Runs the recurrence over `inputs` (steps x input_dim, row-major) from zero
/// state and applies the linear head to the final top-layer hidden state.
std::vector<double> lstm_forward(const LstmParams& params, std::span<const double> inputs);

inline constexpr std::size_t kWindowSteps = 3;
inline constexpr std::size_t kWindowFeatures = 3;

/// Three consecutive matching periods of (time, consumption, production)
/// features and the next period's (consumption, production) target.
struct WindowSample {
  std::array<double, kWindowSteps * kWindowFeatures> inputs{};
  std::array<double, 2> target{};
};

/// Mean squared error over all outputs of the batch, and its gradient with
/// respect to every parameter (backpropagation through time).
double loss_and_gradient(const LstmParams& params, std::span<const WindowSample> batch,
                         std::vector<double>& grad);
double batch_mse(const LstmParams& params, std::span<const WindowSample> batch);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const LstmParams& p) {
    AdamState s;
    s.m.assign(p.values.size(), 0.0);
    s.v.assign(p.values.size(), 0.0);
    return s;
  }
};

struct TrainOutcome {
  LstmParams params;
  AdamState adam;
  /// Loss before the update.
  double mse = 0.0;
  /// False when the gradient was non-finite and the step was rejected.
  bool applied = true;
};

/// One Adam update on the batch mean-squared error. Throws
/// std::invalid_argument on an empty batch.
TrainOutcome train_step(const LstmParams& params, const AdamState& adam, std::span<const WindowSample> batch);

/// Checkpoint: "V2GLSTM1", u32 input/hidden/layers/output, u64 version,
/// u64 count, then count IEEE-754 binary64 values; all little-endian.
std::string encode_checkpoint(const LstmParams& params);
LstmParams decode_checkpoint(const std::string& bytes);
void write_checkpoint(const LstmParams& params, std::ostream& out);
LstmParams read_checkpoint(std::istream& in);

}  // namespace v2g
