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

#include "v2g/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace v2g {

namespace {

/// Costs closer than this (scaled by the optimum) are treated as ties.
double tie_tolerance(double optimum) { return 1e-12 * std::max(1.0, std::abs(optimum)); }

/// O(n^3) shortest augmenting path Hungarian method over `n` rows/cols.
/// cost(r, c) gives the entry for 0-based indices.
template <typename Cost>
std::vector<std::size_t> hungarian_core(std::size_t n, Cost cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_for_row(n, 0);
  for (std::size_t j = 1; j <= n; ++j) col_for_row[row_of_col[j] - 1] = j - 1;
  return col_for_row;
}

/// Optimal value of the submatrix spanned by `rows` x `cols`.
double sub_optimum(const CostMatrix& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  if (rows.empty()) return 0.0;
  auto sol = hungarian_core(rows.size(), [&](std::size_t r, std::size_t c) { return m.at(rows[r], cols[c]); });
  double total = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) total += m.at(rows[r], cols[sol[r]]);
  return total;
}

MatchAssignment to_assignment(const CostMatrix& m, const LsapSolution& sol, std::int64_t period,
                              const std::string& market) {
  MatchAssignment a;
  a.period_index = period;
  a.algorithm = MatchAlgorithm::Hungarian;
  a.total_cost_kwh = sol.total_cost;
  for (std::size_t r = 0; r < m.size(); ++r) {
    const std::size_t c = sol.col_for_row[r];
    if (m.dummy_row(r) || m.dummy_col(c)) continue;
    a.pairs.push_back({m.rows()[r], m.cols()[c], matching_id(period, market, a.pairs.size())});
  }
  return a;
}

}  // namespace

CostMatrix::CostMatrix(std::size_t n, std::vector<double> costs) : cost_(std::move(costs)) {
  if (cost_.size() != n * n) throw std::invalid_argument("cost matrix must be square");
  for (std::size_t i = 0; i < n; ++i) {
    rows_.push_back("P" + std::to_string(i));
    cols_.push_back("E" + std::to_string(i));
    unserved_.push_back(0.0);
  }
  check();
}

void CostMatrix::check() const {
  const std::size_t n = size();
  if (cols_.size() != n || cost_.size() != n * n || unserved_.size() != n) {
    throw std::invalid_argument("cost matrix is not square");
  }
  for (double c : cost_) {
    if (!std::isfinite(c)) throw std::invalid_argument("cost matrix has a non-finite entry");
    if (c < 0.0) throw std::invalid_argument("cost matrix has a negative entry");
  }
}

void CostMatrix::write_csv_rows(std::ostream& out, std::int64_t period, const std::string& market) const {
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t c = 0; c < size(); ++c) {
      out << period << ',' << market << ',' << (dummy_row(r) ? "-" : rows_[r]) << ','
          << (dummy_col(c) ? "-" : cols_[c]) << ',' << format_real(at(r, c)) << '\n';
    }
  }
}

double pairing_cost(double forecast_net_kwh, double ev_available_kwh, double ev_headroom_kwh) {
  if (forecast_net_kwh >= 0.0) return std::max(0.0, forecast_net_kwh - ev_headroom_kwh);
  return std::max(0.0, -forecast_net_kwh - ev_available_kwh);
}

CostMatrix build_cost_matrix(std::span<const Bid> bids, std::int64_t period) {
  std::map<AgentId, const Bid*> prosumers;
  std::map<AgentId, const Bid*> evs;
  for (const auto& b : bids) {
    if (b.period_index != period) {
      throw std::invalid_argument("bid from " + b.agent_id + " is for period " + std::to_string(b.period_index));
    }
    if (prosumers.count(b.agent_id) || evs.count(b.agent_id)) {
      throw std::invalid_argument("duplicate bid from " + b.agent_id);
    }
    (b.side == BidSide::ProsumerNet ? prosumers : evs)[b.agent_id] = &b;
  }
  const std::size_t n = std::max(prosumers.size(), evs.size());
  CostMatrix m;
  m.cost_.assign(n * n, 0.0);
  for (const auto& [id, _] : prosumers) m.rows_.push_back(id);
  for (const auto& [id, _] : evs) m.cols_.push_back(id);
  m.rows_.resize(n);
  m.cols_.resize(n);
  m.unserved_.assign(n, 0.0);
  std::size_t r = 0;
  for (const auto& [_, pb] : prosumers) {
    const double f = pb->prosumer_forecast_net_kwh;
    m.unserved_[r] = std::abs(f);
    std::size_t c = 0;
    for (const auto& [__, eb] : evs) {
      m.cost_[r * n + c] = pairing_cost(f, eb->ev_available_kwh, eb->ev_headroom_kwh);
      ++c;
    }
    for (; c < n; ++c) m.cost_[r * n + c] = std::abs(f);
    ++r;
  }
  m.check();
  return m;
}

double assignment_total(const CostMatrix& m, std::span<const std::size_t> col_for_row) {
  double total = 0.0;
  for (std::size_t r = 0; r < col_for_row.size(); ++r) total += m.at(r, col_for_row[r]);
  return total;
}

LsapSolution solve_hungarian(const CostMatrix& m) {
  m.check();
  const std::size_t n = m.size();
  LsapSolution sol;
  if (n == 0) return sol;
  const auto first = hungarian_core(n, [&](std::size_t r, std::size_t c) { return m.at(r, c); });
  const double optimum = assignment_total(m, first);
  const double tol = tie_tolerance(optimum);

  // Fix rows in order to the smallest column that still admits an optimum.
  std::vector<char> taken(n, 0);
  double fixed = 0.0;
  sol.col_for_row.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::size_t> rest_rows;
    for (std::size_t rr = r + 1; rr < n; ++rr) rest_rows.push_back(rr);
    bool placed = false;
    for (std::size_t c = 0; c < n && !placed; ++c) {
      if (taken[c]) continue;
      std::vector<std::size_t> rest_cols;
      for (std::size_t cc = 0; cc < n; ++cc) {
        if (!taken[cc] && cc != c) rest_cols.push_back(cc);
      }
      if (fixed + m.at(r, c) + sub_optimum(m, rest_rows, rest_cols) <= optimum + tol) {
        sol.col_for_row[r] = c;
        taken[c] = 1;
        fixed += m.at(r, c);
        placed = true;
      }
    }
    if (!placed) {
      // Round-off kept every candidate above the bound; keep the solver's pick.
      sol.col_for_row = first;
      break;
    }
  }
  sol.total_cost = assignment_total(m, sol.col_for_row);
  return sol;
}

LsapSolution solve_bruteforce(const CostMatrix& m) {
  m.check();
  const std::size_t n = m.size();
  if (n > kBruteForceLimit) {
    throw std::invalid_argument("brute force refused: n=" + std::to_string(n) + " exceeds " +
                                std::to_string(kBruteForceLimit));
  }
  LsapSolution sol;
  if (n == 0) return sol;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, assignment_total(m, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double tol = tie_tolerance(best);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    const double total = assignment_total(m, perm);
    if (total <= best + tol) {
      sol.col_for_row = perm;
      sol.total_cost = total;
      return sol;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  throw std::logic_error("brute force lost its optimum");
}

std::string matching_id(std::int64_t period, const std::string& market, std::size_t k) {
  std::string id = "M" + std::to_string(period);
  if (!market.empty()) id += "-" + market;
  return id + "-" + std::to_string(k);
}

MatchAssignment match_hungarian(const CostMatrix& m, std::int64_t period, const std::string& market) {
  return to_assignment(m, solve_hungarian(m), period, market);
}

MatchAssignment match_bruteforce(const CostMatrix& m, std::int64_t period, const std::string& market) {
  return to_assignment(m, solve_bruteforce(m), period, market);
}

MatchAssignment match_greedy(std::span<const Bid> bids, std::int64_t period, const std::string& market) {
  std::vector<const Bid*> prosumers;
  std::vector<const Bid*> evs;
  for (const auto& b : bids) (b.side == BidSide::ProsumerNet ? prosumers : evs).push_back(&b);
  auto fifo = [](const Bid* a, const Bid* b) {
    if (a->submitted_at != b->submitted_at) return a->submitted_at < b->submitted_at;
    return a->agent_id < b->agent_id;
  };
  std::sort(prosumers.begin(), prosumers.end(), fifo);
  std::sort(evs.begin(), evs.end(), fifo);
  MatchAssignment a;
  a.period_index = period;
  a.algorithm = MatchAlgorithm::Greedy;
  const std::size_t k = std::min(prosumers.size(), evs.size());
  for (std::size_t i = 0; i < k; ++i) {
    a.pairs.push_back({prosumers[i]->agent_id, evs[i]->agent_id, matching_id(period, market, i)});
  }
  a.total_cost_kwh = evaluate_assignment(build_cost_matrix(bids, period), a);
  return a;
}

double evaluate_assignment(const CostMatrix& m, const MatchAssignment& a) {
  std::map<AgentId, std::size_t> row_index;
  std::map<AgentId, std::size_t> col_index;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.dummy_row(i)) row_index[m.rows()[i]] = i;
    if (!m.dummy_col(i)) col_index[m.cols()[i]] = i;
  }
  std::vector<char> paired(m.size(), 0);
  double total = 0.0;
  for (const auto& p : a.pairs) {
    auto r = row_index.find(p.prosumer_id);
    auto c = col_index.find(p.ev_id);
    if (r == row_index.end() || c == col_index.end()) {
      throw std::invalid_argument("pair " + p.prosumer_id + "/" + p.ev_id + " not in cost matrix");
    }
    total += m.at(r->second, c->second);
    paired[r->second] = 1;
  }
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (!paired[r]) total += m.unserved(r);
  }
  return total;
}

}  // namespace v2g
