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

#include <sstream>

#include "v2g/metrics.hpp"

namespace v2g {
namespace {

struct TableRow {
  const char* agent;
  double original;
  double isolated;
  const char* benefit;
};

TEST(AbsoluteBenefit, ReproducesPublishedTable) {
  const TableRow rows[] = {{"L1", 4884.36, 4825.60, "58.76"},
                           {"L2", 8672.30, 8663.95, "8.35"},
                           {"L3", 2967.63, 2874.31, "93.32"},
                           {"R2", 1039.07, 944.96, "94.11"},
                           {"Z0", 6558.82, 6358.40, "200.42"}};
  for (const auto& r : rows) EXPECT_EQ(format_fixed(absolute_benefit(r.original, r.isolated), 2), r.benefit) << r.agent;
}

LoadDataset two_step(double first, double second) {
  LoadDataset ds;
  ds.horizon_s = 20;
  for (const auto& [i, net] : {std::pair{0, first}, std::pair{1, second}}) {
    EnergyRecord r;
    r.agent_id = "P1";
    r.t = Timestamp{i * 10};
    r.production_kwh = std::max(0.0, net);
    r.consumption_kwh = std::max(0.0, -net);
    ds.agents["P1"].push_back(r);
  }
  return ds;
}

TradeEvent trade(std::int64_t t, Counterparty c, double kwh, double price, double available_after) {
  TradeEvent e;
  e.t = Timestamp{t};
  e.counterparty = c;
  e.energy_kwh = kwh;
  e.price_p_per_kwh = price;
  e.prosumer_id = "P1";
  if (c == Counterparty::ProsumerToEv || c == Counterparty::EvToProsumer) {
    e.ev_id = "EV1";
    e.matching_id = "M0-0";
    e.seller_id = c == Counterparty::ProsumerToEv ? "P1" : "EV1";
    e.buyer_id = c == Counterparty::ProsumerToEv ? "EV1" : "P1";
    e.ev_available_kwh_after = available_after;
  } else {
    e.matching_id = kGridMatchingId;
    e.seller_id = c == Counterparty::ProsumerToGrid ? "P1" : kGridMatchingId;
    e.buyer_id = c == Counterparty::ProsumerToGrid ? kGridMatchingId : "P1";
  }
  return e;
}

TEST(Baseline, GridOnlyExchangeAndCost) {
  const LoadDataset ds = two_step(2.0, -1.0);
  EXPECT_EQ(baseline_grid_exchange(ds, "P1"), 3.0);
  EXPECT_NEAR(baseline_grid_cost(ds, "P1", Tariffs{}), 29.49 - 12.8, 1e-12);
}

TEST(MonetaryBenefit, NoTradesMeansNoBenefit) {
  const LoadDataset ds = two_step(0.0, 0.0);
  const RunReport r = build_run_report(ds, {"P1"}, {{"EV1", 17.945}}, Tariffs{}, {});
  EXPECT_EQ(monetary_benefit(r, "P1"), 0.0);
  EXPECT_EQ(monetary_benefit(r, "EV1"), 0.0);
}

TEST(MonetaryBenefit, EvResaleMargin) {
  const LoadDataset ds = two_step(2.0, -2.0);
  const std::vector<TradeEvent> trades{trade(0, Counterparty::ProsumerToEv, 2.0, 17.945, 2.0),
                                       trade(10, Counterparty::EvToProsumer, 2.0, 19.7395, 0.0)};
  const RunReport r = build_run_report(ds, {"P1"}, {{"EV1", 17.945}}, Tariffs{}, trades);
  EXPECT_NEAR(monetary_benefit(r, "EV1"), 3.589, 1e-12);
  EXPECT_NEAR(r.evs[0].cash_flow_p, 3.589, 1e-12);
  EXPECT_EQ(r.evs[0].in_system_kwh, 4.0);
  EXPECT_LE(r.money_residual_p, 1e-9);
}

TEST(MonetaryBenefit, ProsumerSellsInSystemInsteadOfGrid) {
  const LoadDataset ds = two_step(1.0, 0.0);
  const std::vector<TradeEvent> trades{trade(0, Counterparty::ProsumerToEv, 1.0, 17.945, 1.0)};
  const RunReport r = build_run_report(ds, {"P1"}, {{"EV1", 17.945}}, Tariffs{}, trades);
  EXPECT_NEAR(monetary_benefit(r, "P1"), 11.545, 1e-12);
  const AgentReport& p = r.prosumers[0];
  EXPECT_EQ(p.original_grid_kwh, 1.0);
  EXPECT_EQ(p.scenario_grid_kwh, 0.0);
  EXPECT_EQ(p.absolute_benefit_kwh, 1.0);
  EXPECT_EQ(p.in_system_kwh, 1.0);
  EXPECT_EQ(r.benefit_identity_residual_kwh, 0.0);
}

TEST(MonetaryBenefit, BasisReplayWeighsStoredEnergy) {
  // EV holds 2 kWh at 10 p, buys 2 kWh at 17.945: basis 13.9725, margin on 1 kWh sold.
  const LoadDataset ds = two_step(2.0, -1.0);
  const std::vector<TradeEvent> trades{trade(0, Counterparty::ProsumerToEv, 2.0, 17.945, 4.0),
                                       trade(10, Counterparty::EvToProsumer, 1.0, 19.7395, 3.0)};
  const RunReport r = build_run_report(ds, {"P1"}, {{"EV1", 10.0}}, Tariffs{}, trades);
  EXPECT_NEAR(monetary_benefit(r, "EV1"), 19.7395 - 13.9725, 1e-12);
}

TEST(ReportCsv, DeterministicAndRoundTrips) {
  const LoadDataset ds = two_step(2.0, -2.0);
  const std::vector<TradeEvent> trades{trade(0, Counterparty::ProsumerToEv, 2.0, 17.945, 2.0),
                                       trade(10, Counterparty::EvToProsumer, 2.0, 19.7395, 0.0)};
  const RunReport r = build_run_report(ds, {"P1"}, {{"EV1", 17.945}}, Tariffs{}, trades);
  std::ostringstream a, b;
  write_report_csv(r, a);
  write_report_csv(build_run_report(ds, {"P1"}, {{"EV1", 17.945}}, Tariffs{}, trades), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), kReportHeader);
  std::istringstream in(a.str());
  const auto rows = read_report_csv(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].agent_id, "EV_AVG");
  EXPECT_EQ(rows[2].role, ReportRole::EvAverage);
  EXPECT_NEAR(rows[1].money_benefit_p, 3.589, 1e-4);
}

TEST(PercentChange, Cases) {
  EXPECT_EQ(percent_change(5.0, 5.0), 0.0);
  EXPECT_EQ(percent_change(0.0, 0.0), 0.0);
  EXPECT_FALSE(percent_change(0.0, 1.0).has_value());
  EXPECT_NEAR(*percent_change(100.0, 119.9), 19.9, 1e-9);
}

RunIdentity identity() { return RunIdentity{"d", "f", "7/11", "29.49/6.4", "1ev", "greedy", "perfect"}; }

std::vector<AgentReport> prosumers(double l1, double z0) {
  AgentReport a, b;
  a.agent_id = "L1";
  a.in_system_kwh = l1;
  b.agent_id = "Z0";
  b.in_system_kwh = z0;
  return {a, b};
}

TEST(CompareRuns, IdenticalRunsShowNoChange) {
  const Comparison c = compare_runs(identity(), prosumers(3.0, 7.0), identity(), prosumers(3.0, 7.0));
  EXPECT_EQ(c.factor, "none");
  for (const auto& row : c.rows) EXPECT_EQ(row.pct_change, 0.0);
}

TEST(CompareRuns, AggregateChange) {
  RunIdentity b = identity();
  b.algorithm = "hungarian";
  const Comparison c = compare_runs(identity(), prosumers(40.0, 60.0), b, prosumers(50.0, 69.9));
  EXPECT_EQ(c.factor, "algorithm");
  ASSERT_EQ(c.rows.back().agent_id, "AGGREGATE");
  EXPECT_NEAR(*c.rows.back().pct_change, 19.9, 1e-9);
  EXPECT_NEAR(*c.rows[0].pct_change, 25.0, 1e-9);
}

TEST(CompareRuns, MismatchedRunsRefused) {
  RunIdentity b = identity();
  b.seeds = "8/11";
  EXPECT_THROW(compare_runs(identity(), prosumers(1, 1), b, prosumers(1, 1)), std::invalid_argument);
  b = identity();
  b.algorithm = "hungarian";
  b.forecaster = "federated";
  EXPECT_THROW(compare_runs(identity(), prosumers(1, 1), b, prosumers(1, 1)), std::invalid_argument);
}

TEST(RenderSvg, ContainsSeriesAndGroups) {
  BarChart chart{"Energy", "kWh", {"L1", "Z0"}, {"isolated", "1ev"}, {{1.0, 2.0}, {3.0, 4.0}}};
  const std::string svg = render_svg(chart);
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
  for (const char* s : {"L1", "Z0", "isolated", "1ev", "</svg>"}) EXPECT_NE(svg.find(s), std::string::npos) << s;
}

}  // namespace
}  // namespace v2g
