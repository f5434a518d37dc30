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
#include <string>
#include <vector>

#include "v2g/artifacts.hpp"

namespace v2g {

struct SweepOptions {
  Json base;  // scenario document with resolved paths
  std::vector<std::size_t> evs{1, 2, 3, 4, 5};
  std::vector<MatchAlgorithm> algorithms{MatchAlgorithm::Greedy, MatchAlgorithm::Hungarian};
  std::vector<ForecasterKind> forecasters{ForecasterKind::Perfect, ForecasterKind::Federated};
  bool include_isolated = true;
};

struct SweepRun {
  std::string name;  // run directory name, e.g. "2ev_hungarian_federated"
  Json scenario;
  RunIdentity identity;
  RunReport report;
};

/// Scenario documents of the grid: every fleet size x algorithm x
/// forecaster, plus one Isolated run (hungarian/perfect when swept).
std::vector<std::pair<std::string, Json>> sweep_plan(const SweepOptions& opts);

/// Runs the plan into `out_dir/<run>/` and writes comparison.csv,
/// sweep_summary.csv, energy_by_scenario.svg and money_by_scenario.svg.
/// Progress goes to `log`.
std::vector<SweepRun> run_sweep(const SweepOptions& opts, const std::filesystem::path& out_dir, std::ostream& log);

/// Runs one scenario document into `dir`; returns the report.
RunReport simulate_to_dir(const Json& scenario, const std::filesystem::path& base_dir,
                          const std::filesystem::path& dir,
                          std::shared_ptr<const FederatedTrace> trace = nullptr);

}  // namespace v2g
