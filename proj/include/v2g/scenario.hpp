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
#include <string>

#include "json.hpp"
#include "v2g/engine.hpp"

namespace v2g {

/// Scenario file schema (JSON). Unknown fields are rejected.
///
///   name                 string, optional
///   dataset              {"path": "load.csv"} | {"preset": "paper5", "horizon_s": 86400}
///   fleet                {"path": "itineraries.csv"} | {"preset": "paper5"} |
///                        {"synthetic": {"count", "seed", "away_blocks_per_day",
///                                       "c_total_kwh", "driving_kw", "reserve_days"}}
///   scenario             {"kind": "isolated"} | {"kind": "shared", "evs": k}
///   algorithm            "greedy" | "hungarian"
///   forecaster           "perfect" | "federated"
///   matching_period_s    default 60
///   data_resolution_s    default 10
///   tariffs              {"grid_buy_p_per_kwh": 29.49, "grid_sell_p_per_kwh": 6.4}
///   seeds                {"market": 7, "model": 11}
///   aggregation_period   default 15 (periods)
///   driving_kw           default 7.5
///   initial_cost_basis_p_per_kwh   optional, default split price
///   max_step_kwh         optional per-step charge/discharge cap
///   fault_injection      {"battery_fault_period": p}, test hook
///
/// Relative paths resolve against `base_dir`.
using Json = nlohmann::json;

/// Parses the file as JSON; throws ConfigError on I/O or syntax errors.
Json read_scenario_file(const std::filesystem::path& path);

/// Rewrites relative dataset/fleet paths as absolute ones.
Json resolve_paths(Json doc, const std::filesystem::path& base_dir);

/// Builds and validates a scenario; throws ConfigError naming the field.
ScenarioConfig build_scenario(const Json& doc, const std::filesystem::path& base_dir);

/// Applies a `--seed` override: market and model seeds both take the value.
Json with_seed(Json doc, std::uint64_t seed);

/// Default scenario for the five-agent reference fixture.
Json reference_scenario();

}  // namespace v2g
