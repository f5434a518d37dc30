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

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2g/data.hpp"
#include "v2g/domain.hpp"
#include "v2g/pricing.hpp"

namespace v2g {

enum class ReportRole { Prosumer, Ev, EvAverage };

const char* to_string(ReportRole r);

/// One row of report.csv.
struct AgentReport {
  AgentId agent_id;
  ReportRole role = ReportRole::Prosumer;
  double original_grid_kwh = 0.0;
  double scenario_grid_kwh = 0.0;
  double absolute_benefit_kwh = 0.0;
  double in_system_kwh = 0.0;
  /// Prosumers: grid-only cost minus scenario net cost. EVs: realized
  /// resale margin, sum of (price - cost basis) over discharged kWh.
  double money_benefit_p = 0.0;
  /// Sales revenue minus purchase cost over all of the agent's trades.
  double cash_flow_p = 0.0;
};

/// Sum over steps of |production - consumption|: everything traded with the grid.
double baseline_grid_exchange(const LoadDataset& ds, const AgentId& agent);

/// Grid-only settlement cost in pence (negative when the agent earns).
double baseline_grid_cost(const LoadDataset& ds, const AgentId& agent, const Tariffs& tariffs);

double absolute_benefit(double original_kwh, double scenario_kwh);

struct RunReport {
  std::vector<AgentReport> prosumers;
  std::vector<AgentReport> evs;
  AgentReport ev_average;
  /// |sum of all cash deltas, grid included|.
  double money_residual_p = 0.0;
  /// Max over prosumers of |original - scenario grid - in-system|.
  double benefit_identity_residual_kwh = 0.0;
  std::optional<double> min_in_system_price;
  std::optional<double> max_in_system_price;

  [[nodiscard]] double total_in_system_kwh() const;
  [[nodiscard]] std::vector<AgentReport> rows() const;
};

/// Builds every report quantity from a run's trade log. EV cost bases are
/// replayed from the logged post-trade battery state, starting at
/// `initial_basis` per EV.
RunReport build_run_report(const LoadDataset& ds, const std::vector<AgentId>& prosumers,
                           const std::map<AgentId, double>& initial_basis, const Tariffs& tariffs,
                           std::span<const TradeEvent> trades);

/// Money benefit of one agent: prosumer or EV rows of the report.
double monetary_benefit(const RunReport& report, const AgentId& agent);

inline constexpr const char* kReportHeader =
    "agent_id,role,original_grid_kwh,scenario_grid_kwh,absolute_benefit_kwh,in_system_kwh,money_benefit_p,"
    "cash_flow_p";

/// report.csv: prosumers, EVs (sorted by id), then the EV_AVG row.
/// kWh to 6 decimals, pence to 4.
void write_report_csv(const RunReport& report, std::ostream& out);
std::vector<AgentReport> read_report_csv(std::istream& in);

/// Factors a run comparison may differ in.
struct RunIdentity {
  std::string dataset_digest;
  std::string fleet_digest;
  std::string seeds;
  std::string tariffs;
  std::string scenario;
  std::string algorithm;
  std::string forecaster;
};

struct ComparisonRow {
  AgentId agent_id;  // "AGGREGATE" for the total
  double a_kwh = 0.0;
  double b_kwh = 0.0;
  /// Empty when a is zero and b is not.
  std::optional<double> pct_change;
};

struct Comparison {
  std::string factor;  // "none", "algorithm", "forecaster" or "scenario"
  std::vector<ComparisonRow> rows;
};

std::optional<double> percent_change(double a, double b);

/// Percent change in prosumers' in-system traded kWh from run a to run b.
/// Throws std::invalid_argument when the runs differ in more than one
/// factor, or in data, fleet, seeds or tariffs.
Comparison compare_runs(const RunIdentity& a_id, const std::vector<AgentReport>& a, const RunIdentity& b_id,
                        const std::vector<AgentReport>& b);

inline constexpr const char* kComparisonHeader = "table,scenario,agent_id,metric,a_label,b_label,a_kwh,b_kwh,pct_change";

/// Appends rows; metric is always in_system_kwh.
void write_comparison_rows(std::ostream& out, const std::string& table, const std::string& scenario,
                           const std::string& a_label, const std::string& b_label, const Comparison& c);

/// Grouped bar chart as a standalone SVG document.
struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> groups;
  std::vector<std::string> series;
  /// values[series][group]
  std::vector<std::vector<double>> values;
};

std::string render_svg(const BarChart& chart);

}  // namespace v2g
