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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "v2g/data.hpp"
#include "v2g/domain.hpp"
#include "v2g/forecast.hpp"
#include "v2g/ledger.hpp"
#include "v2g/matching.hpp"
#include "v2g/pricing.hpp"

namespace v2g {

enum class ScenarioKind { Isolated, Shared };
enum class ForecasterKind { Perfect, Federated };

const char* to_string(ForecasterKind f);
ForecasterKind parse_forecaster(const std::string& s);

struct Seeds {
  std::uint64_t market = 7;  // bid submission order
  std::uint64_t model = 11;  // genesis LSTM parameters

  friend bool operator==(const Seeds&, const Seeds&) = default;
};

/// A fully resolved scenario: data loaded, fleet built.
struct ScenarioConfig {
  std::string name = "scenario";
  LoadDataset dataset;
  std::vector<EvSpec> fleet;
  ScenarioKind kind = ScenarioKind::Shared;
  /// Number of fleet EVs trading in a Shared scenario (first k of the fleet).
  std::size_t shared_evs = 1;
  MatchAlgorithm algorithm = MatchAlgorithm::Hungarian;
  ForecasterKind forecaster = ForecasterKind::Perfect;
  std::int64_t matching_period_s = 60;
  std::int64_t data_resolution_s = 10;
  Tariffs tariffs;
  Seeds seeds;
  std::int64_t aggregation_period = 15;
  double driving_kw = 7.5;
  /// Price attributed to energy an EV holds at start; defaults to the split price.
  std::optional<double> initial_cost_basis;
  /// Per-step charge/discharge cap in kWh; unlimited when unset.
  std::optional<double> max_step_kwh;
  bool dump_costs = false;
  /// Test hook: corrupt an EV battery during this period.
  std::optional<std::int64_t> battery_fault_period;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  /// "isolated" or "<k>ev".
  [[nodiscard]] std::string scenario_label() const;
  [[nodiscard]] double initial_basis() const { return initial_cost_basis.value_or(split_price(tariffs)); }
};

/// Costs of one market's period under both algorithms, on the same matrix.
struct PeriodCosts {
  std::int64_t period = 0;
  std::string market;
  double greedy_cost_kwh = 0.0;
  double hungarian_cost_kwh = 0.0;
  /// Cost of the assignment actually used.
  double chosen_cost_kwh = 0.0;
};

struct EngineChecks {
  double max_energy_residual_kwh = 0.0;
  std::size_t battery_violations = 0;
  std::size_t steps = 0;
  std::size_t periods = 0;
  std::size_t voided_matchings = 0;
};

struct RunArtifacts {
  ScenarioConfig config;
  std::vector<AgentId> prosumers;
  std::vector<AgentId> evs;
  /// Battery at simulation start for every trading EV (clones included).
  std::map<AgentId, Battery> initial_batteries;
  std::vector<TradeEvent> trades;
  std::vector<AnchorRecord> anchors;
  std::vector<std::string> payloads;
  Digest ledger_head{};
  std::vector<PeriodCosts> period_costs;
  EngineChecks checks;
  std::optional<FederatedTrace> federated;
  /// CSV body rows of per-period cost matrices when dump_costs is set.
  std::string cost_dump;
};

/// Presence of each prosumer's fog node under the scenario's fleet layout.
FogPresence fog_presence_for(const ScenarioConfig& cfg);

/// Forecasts, training and aggregation of the federated forecaster for the
/// scenario. Independent of trading, so runs sharing a fleet layout and
/// dataset may share one trace.
FederatedTrace federated_trace_for(const ScenarioConfig& cfg);

/// Step-level simulation state. run() drives it period by period; tests may
/// drive it directly.
class Engine {
 public:
  /// `trace` supplies federated forecasts; computed on demand when absent.
  explicit Engine(ScenarioConfig cfg, std::shared_ptr<const FederatedTrace> trace = nullptr);

  [[nodiscard]] std::int64_t periods() const { return periods_; }
  /// Presence update, forecasts, bids, matching. Returns the period's assignments.
  const std::vector<MatchAssignment>& begin_period(std::int64_t period);
  /// Executes one data step of the open period and returns its trades.
  std::vector<TradeEvent> execute_step(std::int64_t step_index);
  /// Closes the open period: registry publishes and ledger anchoring.
  void end_period();

  /// Unscheduled departure: voids the EV's matching for the rest of the
  /// period and keeps it out of bidding until its itinerary shows it back
  /// for a full period.
  void handle_departure(const AgentId& ev_id, Timestamp t);

  [[nodiscard]] const Battery& battery(const AgentId& ev_id) const;
  [[nodiscard]] const Ledger& ledger() const { return ledger_; }
  [[nodiscard]] RunArtifacts finish() &&;

 private:
  struct EvState {
    AgentId id;
    EvItinerary itinerary;
    Battery battery;
    bool present = false;
    bool forced_away = false;
    std::optional<Timestamp> departed_at;
  };
  struct Market {
    std::string name;
    std::vector<std::size_t> prosumers;  // indices into prosumers_
    std::vector<std::size_t> evs;        // indices into evs_
  };

  EvState& ev(const AgentId& id);
  void update_presence(Timestamp t);
  double prosumer_forecast(std::size_t prosumer, std::int64_t period) const;
  void log(const TradeEvent& e);
  void check_batteries(Timestamp t);

  ScenarioConfig cfg_;
  std::shared_ptr<const FederatedTrace> trace_;
  std::vector<AgentId> prosumers_;
  std::vector<EvState> evs_;
  std::vector<Market> markets_;
  Ledger ledger_;
  std::int64_t periods_ = 0;
  std::int64_t steps_per_period_ = 0;
  std::int64_t period_ = -1;
  std::vector<MatchAssignment> assignments_;
  /// Matched EV index and matching id per prosumer for the open period.
  std::vector<std::optional<std::pair<std::size_t, std::string>>> match_of_;
  std::size_t next_publish_ = 0;
  RunArtifacts out_;
};

/// Runs the full horizon. Throws InvariantBreach with period/step context.
RunArtifacts run(const ScenarioConfig& cfg, std::shared_ptr<const FederatedTrace> trace = nullptr);

}  // namespace v2g
