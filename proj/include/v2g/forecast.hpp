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

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "v2g/bytes.hpp"
#include "v2g/data.hpp"
#include "v2g/lstm.hpp"

namespace v2g {

/// Element-wise arithmetic mean; version is max(input versions) + 1.
/// Each element is reduced over its values in sorted order, so the result is
/// bitwise independent of the order of `models`.
/// Throws std::invalid_argument on an empty list or mismatched shapes.
LstmParams federated_aggregate(std::span<const LstmParams> models);

/// Holds the current global model; genesis is seeded uniform params, version 0.
class ModelRegistry {
 public:
  ModelRegistry(const LstmShape& shape, std::uint64_t genesis_seed, double init_scale = 0.08);

  [[nodiscard]] const LstmParams& pull_global() const { return global_; }
  /// Replaces the global model with the aggregate of `locals`.
  const LstmParams& aggregate(std::span<const LstmParams> locals);

 private:
  LstmParams global_;
};

/// Running min-max scaler over values seen so far.
class MinMaxNormalizer {
 public:
  void observe(double x);
  [[nodiscard]] double normalize(double x) const { return (x - lo_) / scale(); }
  /// A constant series denormalizes to its only observed value.
  [[nodiscard]] double denormalize(double z) const { return hi_ > lo_ ? z * (hi_ - lo_) + lo_ : lo_; }
  [[nodiscard]] bool seen() const { return seen_; }

 private:
  [[nodiscard]] double scale() const { return hi_ > lo_ ? hi_ - lo_ : 1.0; }

  bool seen_ = false;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

/// Per-period totals observed for one agent.
struct PeriodTotals {
  std::int64_t period_start_s = 0;
  double consumption_kwh = 0.0;
  double production_kwh = 0.0;
};

/// Sums of an agent's records over matching period `period`. Throws
/// std::out_of_range when the period lies outside the horizon.
PeriodTotals perfect_forecast(const LoadDataset& ds, const AgentId& agent, std::int64_t period,
                              std::int64_t matching_period_s);

/// Completed-period history for one agent with its feature scalers.
class AgentHistory {
 public:
  void append(const PeriodTotals& totals);
  [[nodiscard]] std::size_t size() const { return periods_.size(); }
  [[nodiscard]] const PeriodTotals& at(std::size_t i) const { return periods_.at(i); }
  [[nodiscard]] const MinMaxNormalizer& consumption_scaler() const { return cons_; }
  [[nodiscard]] const MinMaxNormalizer& production_scaler() const { return prod_; }

  /// Window whose inputs are periods target-3..target-1. The target is
  /// filled when `target` is already in history, left zero otherwise.
  /// Throws std::out_of_range if target < 3 or target > size().
  [[nodiscard]] WindowSample window(std::size_t target) const;
  /// Up to `max_windows` windows ending at the most recent period.
  [[nodiscard]] std::vector<WindowSample> recent_windows(std::size_t max_windows) const;

 private:
  std::vector<PeriodTotals> periods_;
  MinMaxNormalizer cons_;
  MinMaxNormalizer prod_;
};

struct FederatedConfig {
  LstmShape shape{};
  std::uint64_t genesis_seed = 11;
  double init_scale = 0.08;
  double lr = 1e-3;
  std::size_t batch_windows = 32;
  /// Aggregate every this many matching periods.
  std::int64_t aggregation_period = 15;
  std::int64_t matching_period_s = 60;
};

struct PublishEvent {
  std::int64_t period = 0;  // aggregation happens at the end of this period
  std::uint64_t version = 0;
  Digest params_hash{};
};

/// Bid-side forecast for one agent and period.
struct AgentForecast {
  double consumption_kwh = 0.0;
  double production_kwh = 0.0;
  /// True when the cold-start rule substituted last period's actual net.
  bool fallback = false;
  /// Global version the local model descends from (when not fallback).
  std::uint64_t model_version = 0;

  [[nodiscard]] double net() const { return production_kwh - consumption_kwh; }
};

/// Everything the federated forecaster produces over a run. Forecasts never
/// depend on trading outcomes, so the trace can be computed up front.
struct FederatedTrace {
  std::vector<AgentId> agents;
  /// [period][agent index]
  std::vector<std::vector<AgentForecast>> forecasts;
  std::vector<PublishEvent> publishes;
  LstmParams genesis;
  LstmParams final_global;
  std::size_t rejected_steps = 0;
};

/// Whether the fog node training agent `agent_index` is plugged in for the
/// whole of `period`.
using FogPresence = std::function<bool(std::size_t agent_index, std::int64_t period)>;

/// Runs the per-agent training loop: predict each period from the preceding
/// three, train once per period on the most recent windows while the fog node
/// is present, aggregate every `aggregation_period` periods. A returning fog
/// node restarts from the current global model.
FederatedTrace run_federated_forecaster(const LoadDataset& ds, const FederatedConfig& cfg,
                                        const FogPresence& fog_present);

}  // namespace v2g
