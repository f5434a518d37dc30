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

#include "v2g/forecast.hpp"
#include "v2g/rng.hpp"

namespace v2g {
namespace {

LstmParams filled(const LstmShape& s, double v, std::uint64_t version = 0) {
  LstmParams p(s, version);
  std::fill(p.values.begin(), p.values.end(), v);
  return p;
}

LoadDataset small_dataset(std::int64_t horizon_s = 3600) {
  return generate_dataset(reference_agents(), horizon_s);
}

TEST(FederatedAggregate, MeanOfTwo) {
  const LstmShape s{3, 4, 2, 2};
  const std::vector<LstmParams> in{filled(s, 1.0, 3), filled(s, 3.0, 5)};
  const LstmParams out = federated_aggregate(in);
  for (double v : out.values) EXPECT_EQ(v, 2.0);
  EXPECT_EQ(out.version, 6u);
}

TEST(FederatedAggregate, MatchesIndependentMean) {
  const LstmShape s{3, 8, 2, 2};
  for (std::size_t k : {1u, 2u, 5u}) {
    std::vector<LstmParams> in;
    for (std::size_t i = 0; i < k; ++i) in.push_back(random_params(s, 40 + i, 1.0));
    const LstmParams out = federated_aggregate(in);
    for (std::size_t j = 0; j < out.values.size(); ++j) {
      long double sum = 0.0L;
      for (const auto& m : in) sum += m.values[j];
      EXPECT_NEAR(out.values[j], static_cast<double>(sum / k), 1e-12);
    }
  }
}

TEST(FederatedAggregate, IdempotentOnIdenticalModels) {
  const LstmParams m = random_params(LstmShape{}, 5);
  for (std::size_t k = 1; k <= 7; ++k) {
    const std::vector<LstmParams> in(k, m);
    EXPECT_EQ(federated_aggregate(in).values, m.values) << k;
  }
}

TEST(FederatedAggregate, OrderIndependentBitwise) {
  std::vector<LstmParams> in;
  for (std::uint64_t i = 0; i < 5; ++i) in.push_back(random_params(LstmShape{}, 90 + i));
  const LstmParams ref = federated_aggregate(in);
  std::vector<std::size_t> order{0, 1, 2, 3, 4};
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    std::vector<LstmParams> shuffled;
    for (auto i : order) shuffled.push_back(in[i]);
    EXPECT_EQ(federated_aggregate(shuffled).values, ref.values);
  }
}

TEST(FederatedAggregate, RefusesMixedShapesAndEmpty) {
  const std::vector<LstmParams> mixed{filled(LstmShape{3, 4, 2, 2}, 1.0), filled(LstmShape{3, 5, 2, 2}, 1.0)};
  EXPECT_THROW(federated_aggregate(mixed), std::invalid_argument);
  EXPECT_THROW(federated_aggregate({}), std::invalid_argument);
}

TEST(ModelRegistry, GenesisThenAggregateBumpsVersion) {
  ModelRegistry reg(LstmShape{}, 11);
  EXPECT_EQ(reg.pull_global().version, 0u);
  EXPECT_EQ(reg.pull_global().values, random_params(LstmShape{}, 11).values);
  const std::vector<LstmParams> locals{reg.pull_global(), reg.pull_global()};
  reg.aggregate(locals);
  EXPECT_EQ(reg.pull_global().version, 1u);
}

TEST(PerfectForecast, SumsTheMatchingPeriod) {
  SyntheticPvParams p;
  p.base_consumption_kw = 1.0;
  LoadDataset ds;
  ds.resolution_s = 10;
  ds.horizon_s = 120;
  ds.agents["A"] = generate_pv_profile("A", p, 120);
  const PeriodTotals t = perfect_forecast(ds, "A", 1, 60);
  EXPECT_EQ(t.period_start_s, 60);
  EXPECT_NEAR(t.consumption_kwh, 6.0 / 360.0, 1e-15);
  EXPECT_EQ(t.production_kwh, 0.0);
  EXPECT_THROW(perfect_forecast(ds, "A", 2, 60), std::out_of_range);
  EXPECT_THROW(perfect_forecast(ds, "A", -1, 60), std::out_of_range);
}

TEST(MinMaxNormalizer, RoundTrip) {
  MinMaxNormalizer n;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) n.observe(rng.uniform(-5.0, 9.0));
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-5.0, 9.0);
    EXPECT_NEAR(n.denormalize(n.normalize(x)), x, 1e-12);
  }
}

TEST(MinMaxNormalizer, ConstantSeriesDenormalizesToItsValue) {
  MinMaxNormalizer n;
  n.observe(0.0);
  n.observe(0.0);
  EXPECT_EQ(n.normalize(0.0), 0.0);
  EXPECT_EQ(n.denormalize(0.7), 0.0);
}

TEST(AgentHistory, WindowTargetMatchesPerfectForecast) {
  const LoadDataset ds = small_dataset();
  AgentHistory h;
  for (std::int64_t p = 0; p < 60; ++p) h.append(perfect_forecast(ds, "Z0", p, 60));
  for (std::size_t target = kWindowSteps; target < h.size(); ++target) {
    const WindowSample w = h.window(target);
    const PeriodTotals truth = perfect_forecast(ds, "Z0", static_cast<std::int64_t>(target), 60);
    EXPECT_NEAR(h.consumption_scaler().denormalize(w.target[0]), truth.consumption_kwh, 1e-12);
    EXPECT_NEAR(h.production_scaler().denormalize(w.target[1]), truth.production_kwh, 1e-12);
  }
  EXPECT_THROW((void)h.window(2), std::out_of_range);
  EXPECT_THROW((void)h.window(61), std::out_of_range);
  EXPECT_EQ(h.recent_windows(32).size(), 32u);
}

TEST(FederatedForecaster, ColdStartFallsBackToLastActual) {
  const LoadDataset ds = small_dataset();
  FederatedConfig cfg;
  const FederatedTrace tr = run_federated_forecaster(ds, cfg, [](std::size_t, std::int64_t) { return true; });
  ASSERT_EQ(tr.forecasts.size(), 60u);
  for (std::size_t a = 0; a < tr.agents.size(); ++a) {
    EXPECT_TRUE(tr.forecasts[0][a].fallback);
    EXPECT_EQ(tr.forecasts[0][a].net(), 0.0);
    for (std::int64_t p = 1; p < 3; ++p) {
      const auto& f = tr.forecasts[static_cast<std::size_t>(p)][a];
      EXPECT_TRUE(f.fallback);
      EXPECT_EQ(f.net(), [&] {
        const PeriodTotals prev = perfect_forecast(ds, tr.agents[a], p - 1, 60);
        return prev.production_kwh - prev.consumption_kwh;
      }());
    }
    EXPECT_FALSE(tr.forecasts[3][a].fallback);
  }
  EXPECT_EQ(tr.publishes.size(), 4u);
  EXPECT_EQ(tr.publishes.back().version, 4u);
}

TEST(FederatedForecaster, JoiningNodeStartsFromCurrentGlobal) {
  const LoadDataset ds = small_dataset();
  FederatedConfig cfg;
  // Agent 0's node arrives at period 20; the others are present throughout.
  const FederatedTrace tr = run_federated_forecaster(
      ds, cfg, [](std::size_t a, std::int64_t p) { return a != 0 || p >= 20; });
  EXPECT_TRUE(tr.forecasts[19][0].fallback);
  EXPECT_FALSE(tr.forecasts[20][0].fallback);
  EXPECT_EQ(tr.forecasts[20][0].model_version, 1u);
  EXPECT_EQ(tr.forecasts[20][1].model_version, 1u);
}

TEST(FederatedForecaster, Deterministic) {
  const LoadDataset ds = small_dataset();
  FederatedConfig cfg;
  auto present = [](std::size_t a, std::int64_t p) { return (p / 7 + static_cast<std::int64_t>(a)) % 3 != 0; };
  const FederatedTrace a = run_federated_forecaster(ds, cfg, present);
  const FederatedTrace b = run_federated_forecaster(ds, cfg, present);
  EXPECT_EQ(a.final_global.values, b.final_global.values);
  ASSERT_EQ(a.publishes.size(), b.publishes.size());
  for (std::size_t i = 0; i < a.publishes.size(); ++i) EXPECT_EQ(a.publishes[i].params_hash, b.publishes[i].params_hash);
  for (std::size_t p = 0; p < a.forecasts.size(); ++p) {
    for (std::size_t i = 0; i < a.agents.size(); ++i) EXPECT_EQ(a.forecasts[p][i].net(), b.forecasts[p][i].net());
  }
}

TEST(FederatedForecaster, PureConsumerNeverForecastsProduction) {
  const LoadDataset ds = small_dataset(7200);
  const FederatedTrace tr = run_federated_forecaster(ds, FederatedConfig{}, [](std::size_t, std::int64_t) { return true; });
  const auto l2 = std::find(tr.agents.begin(), tr.agents.end(), "L2") - tr.agents.begin();
  for (const auto& row : tr.forecasts) EXPECT_EQ(row[static_cast<std::size_t>(l2)].production_kwh, 0.0);
}

}  // namespace
}  // namespace v2g
