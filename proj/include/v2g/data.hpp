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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "v2g/domain.hpp"

namespace v2g {

/// Per-agent energy records on a shared, gap-free time grid.
struct LoadDataset {
  std::int64_t resolution_s = 10;
  std::int64_t horizon_s = 0;
  std::map<AgentId, std::vector<EnergyRecord>> agents;

  [[nodiscard]] std::size_t steps() const {
    return resolution_s > 0 ? static_cast<std::size_t>(horizon_s / resolution_s) : 0;
  }
  [[nodiscard]] std::vector<AgentId> agent_ids() const;
  [[nodiscard]] const std::vector<EnergyRecord>& records(const AgentId& id) const;

  /// Throws ConfigError if the grid invariants fail, or if matching_period_s
  /// (when positive) does not divide the horizon.
  void validate(std::int64_t matching_period_s = 0) const;
};

LoadDataset parse_load_csv(std::istream& in, std::int64_t resolution_s = 10);
LoadDataset load_csv(const std::filesystem::path& path, std::int64_t resolution_s = 10);
/// Canonical form: header, agents ascending, timestamps ascending, shortest
/// round-trip reals.
void write_load_csv(const LoadDataset& ds, std::ostream& out);
void write_load_csv(const LoadDataset& ds, const std::filesystem::path& path);

struct SyntheticPvParams {
  double peak_production_kw = 0.0;
  double base_consumption_kw = 0.0;
  double consumption_noise_frac = 0.0;
  std::int64_t sunrise_s = 6 * 3600;
  std::int64_t sunset_s = 18 * 3600;
  std::uint64_t rng_seed = 0;
};

/// Half-sine PV production between sunrise and sunset, constant consumption
/// with uniform multiplicative noise.
std::vector<EnergyRecord> generate_pv_profile(const AgentId& agent_id, const SyntheticPvParams& params,
                                              std::int64_t horizon_s, std::int64_t resolution_s = 10);

LoadDataset generate_dataset(const std::vector<std::pair<AgentId, SyntheticPvParams>>& agents,
                             std::int64_t horizon_s, std::int64_t resolution_s = 10);

/// One EV's itinerary plus its battery at simulation start.
struct EvSpec {
  EvItinerary itinerary;
  Battery battery;
};

struct EvGenParams {
  std::uint64_t seed = 0;
  std::int64_t horizon_s = 86400;
  int away_blocks_per_day = 1;
  double c_total_kwh = 79.5;
  /// Average draw while away; converts absence time into driving energy.
  double driving_kw = 7.5;
  /// Reserve expressed in days of mean driving consumption.
  double reserve_days = 7.0;
};

/// Driving energy consumed over an absence of the given length.
inline double driving_energy_kwh(std::int64_t absent_s, double driving_kw) {
  return driving_kw * static_cast<double>(absent_s) / 3600.0;
}

/// Reserve implied by the itinerary: reserve_days x mean daily driving energy.
double derive_reserve_kwh(const EvItinerary& itinerary, std::int64_t horizon_s, double driving_kw,
                          double reserve_days);

/// Throws ConfigError when the derived floor reaches the ceiling.
EvSpec generate_ev_itinerary(const AgentId& ev_id, const EvGenParams& params);

std::vector<EvSpec> parse_itineraries_csv(std::istream& in);
std::vector<EvSpec> load_itineraries_csv(const std::filesystem::path& path);
void write_itineraries_csv(const std::vector<EvSpec>& fleet, std::ostream& out);
void write_itineraries_csv(const std::vector<EvSpec>& fleet, const std::filesystem::path& path);

/// The bundled five-prosumer reference fixture (scenario "paper5").
std::vector<std::pair<AgentId, SyntheticPvParams>> reference_agents();
std::vector<EvSpec> reference_fleet(std::int64_t horizon_s = 86400);

}  // namespace v2g
