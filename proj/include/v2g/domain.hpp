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

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2g {

using AgentId = std::string;

/// Energy conservation tolerance used by every accounting check.
inline constexpr double kEnergyTolerance = 1e-9;
/// Lower / upper operable fractions of total battery capacity.
inline constexpr double kFloorFraction = 0.2;
inline constexpr double kCeilingFraction = 0.8;

/// Matching id carried by trades settled against the main grid.
inline constexpr const char* kGridMatchingId = "GRID";

/// Thrown for malformed configuration or input data.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a runtime invariant of the simulation breaks.
class InvariantBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seconds since simulation start.
struct Timestamp {
  std::int64_t seconds = 0;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t s) : seconds(s) {}

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;

  [[nodiscard]] constexpr bool aligned_to(std::int64_t resolution_s) const {
    return resolution_s > 0 && seconds % resolution_s == 0;
  }
  [[nodiscard]] constexpr std::int64_t seconds_of_day() const { return seconds % 86400; }
};

struct EnergyRecord {
  AgentId agent_id;
  Timestamp t;
  double production_kwh = 0.0;
  double consumption_kwh = 0.0;

  [[nodiscard]] double net() const { return production_kwh - consumption_kwh; }
};

/// EV battery with the operable window
///   0.2 * C_total + reserve <= soc <= 0.8 * C_total.
struct Battery {
  double c_total_kwh = 0.0;
  double reserve_kwh = 0.0;
  double soc_kwh = 0.0;
  double cost_basis_p_per_kwh = 0.0;

  [[nodiscard]] double floor_kwh() const { return kFloorFraction * c_total_kwh + reserve_kwh; }
  [[nodiscard]] double ceiling_kwh() const { return kCeilingFraction * c_total_kwh; }
  /// Energy that may be sold without leaving the window.
  [[nodiscard]] double available_kwh() const { return soc_kwh - floor_kwh(); }
  /// Energy that may be stored without leaving the window.
  [[nodiscard]] double headroom_kwh() const { return ceiling_kwh() - soc_kwh; }
};

/// Returns std::nullopt when the battery satisfies its operable window,
/// otherwise a description naming the broken bound.
std::optional<std::string> validate_battery(const Battery& b, double tolerance = 0.0);

/// Half-open presence interval [arrive, depart).
struct PresenceInterval {
  Timestamp arrive;
  Timestamp depart;

  [[nodiscard]] bool covers(Timestamp from, Timestamp to) const {
    return arrive <= from && to <= depart;
  }
  [[nodiscard]] bool contains(Timestamp t) const { return arrive <= t && t < depart; }
};

inline constexpr std::int64_t kItineraryResolutionS = 900;

struct EvItinerary {
  AgentId ev_id;
  std::vector<PresenceInterval> presence;
  double initial_soc_kwh = 0.0;

  /// True iff the EV is plugged in for the whole of [from, to).
  [[nodiscard]] bool present_for(Timestamp from, Timestamp to) const;
  [[nodiscard]] bool present_at(Timestamp t) const;
  /// Throws ConfigError unless intervals are sorted, disjoint and 900 s aligned.
  void validate() const;
};

enum class BidSide { ProsumerNet, EvResource };

struct Bid {
  std::int64_t period_index = 0;
  AgentId agent_id;
  BidSide side = BidSide::ProsumerNet;
  double prosumer_forecast_net_kwh = 0.0;
  double ev_available_kwh = 0.0;
  double ev_headroom_kwh = 0.0;
  Timestamp submitted_at;

  static Bid prosumer(std::int64_t period, AgentId id, double forecast_net_kwh, Timestamp at) {
    Bid b;
    b.period_index = period;
    b.agent_id = std::move(id);
    b.side = BidSide::ProsumerNet;
    b.prosumer_forecast_net_kwh = forecast_net_kwh;
    b.submitted_at = at;
    return b;
  }
  static Bid ev(std::int64_t period, AgentId id, const Battery& battery, Timestamp at) {
    Bid b;
    b.period_index = period;
    b.agent_id = std::move(id);
    b.side = BidSide::EvResource;
    b.ev_available_kwh = battery.available_kwh();
    b.ev_headroom_kwh = battery.headroom_kwh();
    b.submitted_at = at;
    return b;
  }
};

enum class MatchAlgorithm { Greedy, Hungarian };

struct MatchPair {
  AgentId prosumer_id;
  AgentId ev_id;
  std::string matching_id;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchAssignment {
  std::int64_t period_index = 0;
  std::vector<MatchPair> pairs;
  MatchAlgorithm algorithm = MatchAlgorithm::Hungarian;
  double total_cost_kwh = 0.0;

  /// Throws InvariantBreach if any agent appears twice.
  void check_one_matching() const;
};

/// Direction of an executed transfer.
enum class Counterparty { ProsumerToEv, EvToProsumer, ProsumerToGrid, GridToProsumer };

struct TradeEvent {
  Timestamp t;
  std::string matching_id;
  AgentId seller_id;
  AgentId buyer_id;
  double energy_kwh = 0.0;
  double price_p_per_kwh = 0.0;
  double ev_available_kwh_after = 0.0;
  double ev_headroom_kwh_after = 0.0;
  AgentId prosumer_id;
  AgentId ev_id;  // empty for grid trades
  Counterparty counterparty = Counterparty::ProsumerToGrid;

  [[nodiscard]] bool in_system() const {
    return counterparty == Counterparty::ProsumerToEv || counterparty == Counterparty::EvToProsumer;
  }

  friend bool operator==(const TradeEvent&, const TradeEvent&) = default;
};

const char* to_string(MatchAlgorithm a);
const char* to_string(Counterparty c);
MatchAlgorithm parse_algorithm(const std::string& s);
Counterparty parse_counterparty(const std::string& s);

/// Shortest decimal form that round-trips exactly (used by every writer).
std::string format_real(double v);
/// Strict decimal parse; throws ConfigError on trailing garbage.
double parse_real(const std::string& s);
std::int64_t parse_int(const std::string& s);
/// Half-up rounding to a fixed number of decimals, rendered with that many digits.
std::string format_fixed(double v, int decimals);

}  // namespace v2g
