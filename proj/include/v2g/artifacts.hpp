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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "v2g/engine.hpp"
#include "v2g/metrics.hpp"
#include "v2g/scenario.hpp"

namespace v2g {

inline constexpr const char* kExchangeHeader =
    "t_s,energy_kwh,ev_available_kwh,ev_capacity_kwh,matching_id,prosumer_id,ev_id,price_p_per_kwh,counterparty";

/// exchange.csv: one row per trade. ev_capacity_kwh is the EV's remaining
/// storable energy after the trade; both EV columns are empty for grid trades.
void write_exchange_csv(const std::vector<TradeEvent>& trades, std::ostream& out);
std::vector<TradeEvent> read_exchange_csv(std::istream& in);

/// period_costs.csv: per matching period and market, both algorithms'
/// costs on the same padded matrix.
void write_period_costs_csv(const std::vector<PeriodCosts>& costs, std::ostream& out);
std::vector<PeriodCosts> read_period_costs_csv(std::istream& in);

RunIdentity identity_of(const ScenarioConfig& cfg);
Json identity_to_json(const RunIdentity& id);
RunIdentity identity_from_json(const Json& j);

RunReport report_of(const RunArtifacts& run);

/// Writes exchange.csv, anchors.csv, payloads.bin, report.csv,
/// period_costs.csv, run_summary.json, lstm_global.bin (federated runs),
/// costs.csv (when cost dumps are on) and finally manifest.json listing the
/// SHA-256 of every other file. `scenario` is the resolved scenario document.
Json write_run_dir(const std::filesystem::path& dir, const RunArtifacts& run, const RunReport& report,
                   const Json& scenario);

Json read_manifest(const std::filesystem::path& dir);

struct RunCheck {
  bool ok = true;
  std::optional<std::size_t> first_broken_anchor;
  std::string message;
};

/// Hash chain against the manifest head, exchange.csv against the
/// management-contract trades, then every manifest digest.
RunCheck verify_run_dir(const std::filesystem::path& dir);

/// Recomputes report rows from a run directory's exchange.csv and scenario.
RunReport rebuild_report(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace v2g
