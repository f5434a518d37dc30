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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "v2g/domain.hpp"

namespace v2g {

/// Square prosumer x EV cost matrix in kWh of energy the pairing fails to
/// absorb or serve. Dummy rows / columns pad the smaller side; a dummy row
/// or column has an empty id.
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Raw square matrix with synthetic labels P0.. / E0.. and no dummies.
  explicit CostMatrix(std::size_t n, std::vector<double> costs);

  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return cost_[r * size() + c]; }
  [[nodiscard]] const std::vector<AgentId>& rows() const { return rows_; }
  [[nodiscard]] const std::vector<AgentId>& cols() const { return cols_; }
  [[nodiscard]] bool dummy_row(std::size_t r) const { return rows_[r].empty(); }
  [[nodiscard]] bool dummy_col(std::size_t c) const { return cols_[c].empty(); }
  /// Cost of leaving row r unmatched (its |forecast|; 0 for dummy rows).
  [[nodiscard]] double unserved(std::size_t r) const { return unserved_[r]; }
  /// Throws std::invalid_argument unless square, finite and non-negative.
  void check() const;

  void write_csv_rows(std::ostream& out, std::int64_t period, const std::string& market) const;

 private:
  friend CostMatrix build_cost_matrix(std::span<const Bid> bids, std::int64_t period);

  std::vector<AgentId> rows_;
  std::vector<AgentId> cols_;
  std::vector<double> cost_;
  std::vector<double> unserved_;
};

/// Energy a pairing leaves unmatched: surplus beyond the EV's headroom, or
/// deficit beyond its available energy.
double pairing_cost(double forecast_net_kwh, double ev_available_kwh, double ev_headroom_kwh);

/// Rows are prosumer bids and columns EV bids, each ordered by agent id.
/// Throws std::invalid_argument on duplicate bids or bids for another period.
CostMatrix build_cost_matrix(std::span<const Bid> bids, std::int64_t period);

/// Column chosen for every row of a square matrix.
struct LsapSolution {
  std::vector<std::size_t> col_for_row;
  double total_cost = 0.0;
};

/// Sum of m[r][col_for_row[r]] in row order.
double assignment_total(const CostMatrix& m, std::span<const std::size_t> col_for_row);

/// Minimum-cost assignment (Hungarian method with potentials). Among optimal
/// assignments, returns the lexicographically smallest col_for_row.
LsapSolution solve_hungarian(const CostMatrix& m);
/// Exhaustive search over all permutations; same tie-break. n <= 9.
LsapSolution solve_bruteforce(const CostMatrix& m);

inline constexpr std::size_t kBruteForceLimit = 9;

/// Matching id "M<period>[-<market>]-<k>".
std::string matching_id(std::int64_t period, const std::string& market, std::size_t k);

MatchAssignment match_hungarian(const CostMatrix& m, std::int64_t period, const std::string& market = "");
MatchAssignment match_bruteforce(const CostMatrix& m, std::int64_t period, const std::string& market = "");

/// FIFO pairing: prosumers and EVs each ordered by (submitted_at, id), i-th
/// with i-th. Forecasts are ignored for the pairing; total_cost_kwh is the
/// pairing evaluated on the padded cost matrix.
MatchAssignment match_greedy(std::span<const Bid> bids, std::int64_t period, const std::string& market = "");

/// Cost of an arbitrary one-to-one assignment on `m`: paired costs plus
/// full unserved magnitude for every unpaired prosumer.
double evaluate_assignment(const CostMatrix& m, const MatchAssignment& a);

}  // namespace v2g
