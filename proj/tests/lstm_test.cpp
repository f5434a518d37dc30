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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "v2g/lstm.hpp"
#include "v2g/rng.hpp"

namespace v2g {
namespace {

/// Time-major reference recurrence written against the documented layout.
std::vector<double> naive_forward(const LstmParams& p, const std::vector<double>& x) {
  const LstmShape& s = p.shape;
  const std::size_t H = s.hidden;
  const std::size_t steps = x.size() / s.input_dim;
  std::vector<std::vector<double>> h(s.layers, std::vector<double>(H, 0.0));
  std::vector<std::vector<double>> c = h;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> in(x.begin() + static_cast<long>(t * s.input_dim),
                           x.begin() + static_cast<long>((t + 1) * s.input_dim));
    for (std::size_t l = 0; l < s.layers; ++l) {
      const std::size_t n_in = in.size();
      std::vector<double> pre(4 * H);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        double a = p.values[p.bias_offset(l) + r];
        for (std::size_t j = 0; j < n_in; ++j) a += p.values[p.w_ih_offset(l) + r * n_in + j] * in[j];
        for (std::size_t j = 0; j < H; ++j) a += p.values[p.w_hh_offset(l) + r * H + j] * h[l][j];
        pre[r] = a;
      }
      for (std::size_t j = 0; j < H; ++j) {
        const double i = sig(pre[j]), f = sig(pre[H + j]), g = std::tanh(pre[2 * H + j]), o = sig(pre[3 * H + j]);
        c[l][j] = f * c[l][j] + i * g;
        h[l][j] = o * std::tanh(c[l][j]);
      }
      in = h[l];
    }
  }
  std::vector<double> y(s.output_dim);
  for (std::size_t k = 0; k < s.output_dim; ++k) {
    y[k] = p.values[p.head_b_offset() + k];
    for (std::size_t j = 0; j < H; ++j) y[k] += p.values[p.head_w_offset() + k * H + j] * h.back()[j];
  }
  return y;
}

WindowSample random_window(Rng& rng) {
  WindowSample w;
  for (auto& v : w.inputs) v = rng.uniform01();
  for (auto& v : w.target) v = rng.uniform01();
  return w;
}

std::vector<WindowSample> random_batch(Rng& rng, std::size_t n) {
  std::vector<WindowSample> b;
  for (std::size_t i = 0; i < n; ++i) b.push_back(random_window(rng));
  return b;
}

TEST(LstmShape, ParameterCount) {
  const LstmShape s;
  const std::size_t layer0 = 4 * 32 * 3 + 4 * 32 * 32 + 4 * 32;
  const std::size_t layer1 = 4 * 32 * 32 + 4 * 32 * 32 + 4 * 32;
  EXPECT_EQ(s.param_count(), layer0 + layer1 + 2 * 32 + 2);
}

TEST(LstmForward, ZeroParamsGiveHeadBias) {
  LstmParams p(LstmShape{});
  p.values[p.head_b_offset()] = 0.25;
  p.values[p.head_b_offset() + 1] = -1.5;
  const std::vector<double> x(9, 0.7);
  const auto y = lstm_forward(p, x);
  EXPECT_EQ(y[0], 0.25);
  EXPECT_EQ(y[1], -1.5);
}

TEST(LstmForward, MatchesNaiveRecurrence) {
  Rng rng(17);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const LstmParams p = random_params(LstmShape{}, seed, 0.3);
    std::vector<double> x(9);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const auto y = lstm_forward(p, x);
    const auto ref = naive_forward(p, x);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(y[k], ref[k], 1e-12);
  }
}

TEST(LstmForward, RejectsBadInput) {
  const LstmParams p = random_params(LstmShape{}, 1);
  EXPECT_THROW(lstm_forward(p, std::vector<double>(8, 0.0)), std::invalid_argument);
  std::vector<double> x(9, 0.0);
  x[4] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(lstm_forward(p, x), std::invalid_argument);
}

TEST(LstmGradient, MatchesCentralDifferences) {
  const LstmShape small{3, 4, 2, 2};
  const double h = 1e-5;
  double worst = 0.0;
  for (std::uint64_t draw = 0; draw < 50; ++draw) {
    Rng rng(1000 + draw);
    LstmParams p = random_params(small, 500 + draw, 0.5);
    const auto batch = random_batch(rng, 4);
    std::vector<double> grad;
    loss_and_gradient(p, batch, grad);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double keep = p.values[i];
      p.values[i] = keep + h;
      const double up = batch_mse(p, batch);
      p.values[i] = keep - h;
      const double down = batch_mse(p, batch);
      p.values[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(TrainStep, PerfectFitLeavesParamsNearlyUnchanged) {
  LstmParams p(LstmShape{});
  Rng rng(2);
  auto batch = random_batch(rng, 8);
  for (auto& w : batch) w.target = {0.0, 0.0};
  const AdamState adam = AdamState::for_params(p);
  const TrainOutcome out = train_step(p, adam, batch);
  EXPECT_TRUE(out.applied);
  EXPECT_EQ(out.mse, 0.0);
  for (std::size_t i = 0; i < p.values.size(); ++i) EXPECT_LE(std::abs(out.params.values[i]), adam.lr);
}

TEST(TrainStep, TwoStepsDoNotIncreaseLoss) {
  int improved = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng(7000 + trial);
    const LstmParams p = random_params(LstmShape{}, 300 + trial);
    const auto batch = random_batch(rng, 32);
    const TrainOutcome a = train_step(p, AdamState::for_params(p), batch);
    const TrainOutcome b = train_step(a.params, a.adam, batch);
    if (batch_mse(b.params, batch) <= b.mse) ++improved;
  }
  EXPECT_GE(improved, 95);
}

TEST(TrainStep, NonFiniteLossRejectsUpdate) {
  const LstmParams p = random_params(LstmShape{}, 4);
  Rng rng(4);
  auto batch = random_batch(rng, 2);
  batch[0].target[0] = 1e300;
  const TrainOutcome out = train_step(p, AdamState::for_params(p), batch);
  EXPECT_FALSE(out.applied);
  EXPECT_EQ(out.params.values, p.values);
  EXPECT_EQ(out.adam.step_count, 0u);
}

TEST(TrainStep, EmptyBatchRefused) {
  const LstmParams p = random_params(LstmShape{}, 4);
  EXPECT_THROW(train_step(p, AdamState::for_params(p), {}), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  LstmParams p = random_params(LstmShape{}, 9);
  p.version = 12;
  std::stringstream buf;
  write_checkpoint(p, buf);
  const LstmParams back = read_checkpoint(buf);
  EXPECT_EQ(back.version, 12u);
  EXPECT_EQ(back.shape, p.shape);
  EXPECT_EQ(back.values, p.values);
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(p));
}

TEST(Checkpoint, CorruptInputRejected) {
  const std::string bytes = encode_checkpoint(random_params(LstmShape{}, 9));
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), std::invalid_argument);
  EXPECT_THROW(decode_checkpoint("V2GLSTM0" + bytes.substr(8)), std::invalid_argument);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), std::invalid_argument);
}

}  // namespace
}  // namespace v2g
