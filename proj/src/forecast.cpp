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

#include "v2g/forecast.hpp"

#include <algorithm>
#include <stdexcept>

namespace v2g {

namespace {

/// Pairwise (cascade) sum of an already ordered range.
double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return v[0];
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double time_feature(std::int64_t period_start_s) {
  return static_cast<double>(Timestamp{period_start_s}.seconds_of_day()) / 86400.0;
}

}  // namespace

LstmParams federated_aggregate(std::span<const LstmParams> models) {
  if (models.empty()) throw std::invalid_argument("aggregation needs at least one model");
  const LstmShape& shape = models.front().shape;
  std::uint64_t version = 0;
  for (const auto& m : models) {
    if (!(m.shape == shape) || m.values.size() != shape.param_count()) {
      throw std::invalid_argument("aggregation refused: model shapes differ");
    }
    version = std::max(version, m.version);
  }
  LstmParams out(shape, version + 1);
  std::vector<double> column(models.size());
  const double k = static_cast<double>(models.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    for (std::size_t m = 0; m < models.size(); ++m) column[m] = models[m].values[i];
    std::sort(column.begin(), column.end());
    // A column of equal values averages to that value exactly.
    out.values[i] = column.front() == column.back() ? column.front() : pairwise_sum(column.data(), column.size()) / k;
  }
  return out;
}

ModelRegistry::ModelRegistry(const LstmShape& shape, std::uint64_t genesis_seed, double init_scale)
    : global_(random_params(shape, genesis_seed, init_scale)) {}

const LstmParams& ModelRegistry::aggregate(std::span<const LstmParams> locals) {
  global_ = federated_aggregate(locals);
  return global_;
}

void MinMaxNormalizer::observe(double x) {
  if (!seen_) {
    lo_ = hi_ = x;
    seen_ = true;
    return;
  }
  lo_ = std::min(lo_, x);
  hi_ = std::max(hi_, x);
}

PeriodTotals perfect_forecast(const LoadDataset& ds, const AgentId& agent, std::int64_t period,
                              std::int64_t matching_period_s) {
  if (matching_period_s <= 0 || matching_period_s % ds.resolution_s != 0) {
    throw std::invalid_argument("matching period must be a positive multiple of the resolution");
  }
  const std::int64_t periods = ds.horizon_s / matching_period_s;
  if (period < 0 || period >= periods) {
    throw std::out_of_range("period " + std::to_string(period) + " outside horizon");
  }
  const auto& recs = ds.records(agent);
  const std::int64_t per = matching_period_s / ds.resolution_s;
  PeriodTotals out;
  out.period_start_s = period * matching_period_s;
  for (std::int64_t i = period * per; i < (period + 1) * per; ++i) {
    out.consumption_kwh += recs[static_cast<std::size_t>(i)].consumption_kwh;
    out.production_kwh += recs[static_cast<std::size_t>(i)].production_kwh;
  }
  return out;
}

void AgentHistory::append(const PeriodTotals& totals) {
  periods_.push_back(totals);
  cons_.observe(totals.consumption_kwh);
  prod_.observe(totals.production_kwh);
}

WindowSample AgentHistory::window(std::size_t target) const {
  if (target < kWindowSteps || target > periods_.size()) {
    throw std::out_of_range("window target " + std::to_string(target) + " unavailable");
  }
  WindowSample w;
  for (std::size_t k = 0; k < kWindowSteps; ++k) {
    const auto& p = periods_[target - kWindowSteps + k];
    w.inputs[k * kWindowFeatures + 0] = time_feature(p.period_start_s);
    w.inputs[k * kWindowFeatures + 1] = cons_.normalize(p.consumption_kwh);
    w.inputs[k * kWindowFeatures + 2] = prod_.normalize(p.production_kwh);
  }
  if (target < periods_.size()) {
    w.target[0] = cons_.normalize(periods_[target].consumption_kwh);
    w.target[1] = prod_.normalize(periods_[target].production_kwh);
  }
  return w;
}

std::vector<WindowSample> AgentHistory::recent_windows(std::size_t max_windows) const {
  std::vector<WindowSample> out;
  if (periods_.size() <= kWindowSteps) return out;
  const std::size_t last = periods_.size() - 1;
  const std::size_t first = std::max(kWindowSteps, last + 1 > max_windows ? last + 1 - max_windows : 0);
  for (std::size_t t = first; t <= last; ++t) out.push_back(window(t));
  return out;
}

FederatedTrace run_federated_forecaster(const LoadDataset& ds, const FederatedConfig& cfg,
                                        const FogPresence& fog_present) {
  if (cfg.aggregation_period <= 0) throw std::invalid_argument("aggregation period must be positive");
  if (cfg.shape.input_dim != kWindowFeatures || cfg.shape.output_dim != 2) {
    throw std::invalid_argument("forecaster shape must map 3 features to 2 outputs");
  }
  ds.validate(cfg.matching_period_s);
  const std::int64_t periods = ds.horizon_s / cfg.matching_period_s;

  struct Local {
    LstmParams params;
    AdamState adam;
  };

  FederatedTrace trace;
  trace.agents = ds.agent_ids();
  const std::size_t n = trace.agents.size();
  ModelRegistry registry(cfg.shape, cfg.genesis_seed, cfg.init_scale);
  trace.genesis = registry.pull_global();
  std::vector<std::optional<Local>> locals(n);
  std::vector<AgentHistory> history(n);
  std::vector<char> present(n, 0);
  trace.forecasts.resize(static_cast<std::size_t>(periods));

  for (std::int64_t p = 0; p < periods; ++p) {
    auto& row = trace.forecasts[static_cast<std::size_t>(p)];
    row.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      present[a] = fog_present(a, p) ? 1 : 0;
      if (!present[a]) {
        locals[a].reset();
      } else if (!locals[a]) {
        Local l{registry.pull_global(), {}};
        l.adam = AdamState::for_params(l.params);
        l.adam.lr = cfg.lr;
        locals[a] = std::move(l);
      }
      AgentForecast& f = row[a];
      const AgentHistory& h = history[a];
      if (present[a] && h.size() >= kWindowSteps) {
        const WindowSample w = h.window(h.size());
        const auto y = lstm_forward(locals[a]->params, w.inputs);
        f.consumption_kwh = std::max(0.0, h.consumption_scaler().denormalize(y[0]));
        f.production_kwh = std::max(0.0, h.production_scaler().denormalize(y[1]));
        f.model_version = locals[a]->params.version;
      } else {
        f.fallback = true;
        if (h.size() > 0) {
          f.consumption_kwh = h.at(h.size() - 1).consumption_kwh;
          f.production_kwh = h.at(h.size() - 1).production_kwh;
        }
      }
    }

    for (std::size_t a = 0; a < n; ++a) {
      history[a].append(perfect_forecast(ds, trace.agents[a], p, cfg.matching_period_s));
      if (!present[a]) continue;
      const auto batch = history[a].recent_windows(cfg.batch_windows);
      if (batch.empty()) continue;
      TrainOutcome step = train_step(locals[a]->params, locals[a]->adam, batch);
      if (!step.applied) {
        ++trace.rejected_steps;
        continue;
      }
      locals[a]->params = std::move(step.params);
      locals[a]->adam = std::move(step.adam);
    }

    if ((p + 1) % cfg.aggregation_period == 0) {
      std::vector<LstmParams> active;
      for (std::size_t a = 0; a < n; ++a) {
        if (locals[a]) active.push_back(locals[a]->params);
      }
      if (!active.empty()) {
        const LstmParams& global = registry.aggregate(active);
        trace.publishes.push_back({p, global.version, sha256(encode_checkpoint(global))});
        for (auto& l : locals) {
          if (l) l->params = global;
        }
      }
    }
  }
  trace.final_global = registry.pull_global();
  return trace;
}

}  // namespace v2g
