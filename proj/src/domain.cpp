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

#include "v2g/domain.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace v2g {

namespace {

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::optional<std::string> validate_battery(const Battery& b, double tolerance) {
  if (!(b.c_total_kwh > 0.0) || !std::isfinite(b.c_total_kwh)) {
    return "total capacity " + short_num(b.c_total_kwh) + " must be positive";
  }
  if (b.reserve_kwh < 0.0 || !std::isfinite(b.reserve_kwh)) {
    return "reserve " + short_num(b.reserve_kwh) + " must be non-negative";
  }
  const double floor = b.floor_kwh();
  const double ceiling = b.ceiling_kwh();
  if (!(floor < ceiling)) {
    return "floor " + short_num(floor) + " exceeds ceiling " + short_num(ceiling);
  }
  if (!std::isfinite(b.soc_kwh) || b.soc_kwh < floor - tolerance) {
    return "soc " + short_num(b.soc_kwh) + " below floor " + short_num(floor);
  }
  if (b.soc_kwh > ceiling + tolerance) {
    return "soc " + short_num(b.soc_kwh) + " above ceiling " + short_num(ceiling);
  }
  return std::nullopt;
}

bool EvItinerary::present_for(Timestamp from, Timestamp to) const {
  for (const auto& iv : presence) {
    if (iv.covers(from, to)) return true;
  }
  return false;
}

bool EvItinerary::present_at(Timestamp t) const {
  for (const auto& iv : presence) {
    if (iv.contains(t)) return true;
  }
  return false;
}

void EvItinerary::validate() const {
  Timestamp last{-1};
  for (const auto& iv : presence) {
    if (!iv.arrive.aligned_to(kItineraryResolutionS) || !iv.depart.aligned_to(kItineraryResolutionS)) {
      throw ConfigError("itinerary for " + ev_id + ": interval not aligned to 900 s");
    }
    if (!(iv.arrive < iv.depart)) {
      throw ConfigError("itinerary for " + ev_id + ": empty interval at " +
                        std::to_string(iv.arrive.seconds));
    }
    if (iv.arrive < last) {
      throw ConfigError("itinerary for " + ev_id + ": intervals overlap or are unsorted at " +
                        std::to_string(iv.arrive.seconds));
    }
    last = iv.depart;
  }
}

void MatchAssignment::check_one_matching() const {
  std::set<AgentId> prosumers;
  std::set<AgentId> evs;
  for (const auto& p : pairs) {
    if (!prosumers.insert(p.prosumer_id).second) {
      throw InvariantBreach("prosumer " + p.prosumer_id + " matched twice in period " +
                            std::to_string(period_index));
    }
    if (!evs.insert(p.ev_id).second) {
      throw InvariantBreach("EV " + p.ev_id + " matched twice in period " +
                            std::to_string(period_index));
    }
  }
}

const char* to_string(MatchAlgorithm a) {
  return a == MatchAlgorithm::Greedy ? "greedy" : "hungarian";
}

const char* to_string(Counterparty c) {
  switch (c) {
    case Counterparty::ProsumerToEv: return "prosumer_to_ev";
    case Counterparty::EvToProsumer: return "ev_to_prosumer";
    case Counterparty::ProsumerToGrid: return "prosumer_to_grid";
    case Counterparty::GridToProsumer: return "grid_to_prosumer";
  }
  return "?";
}

MatchAlgorithm parse_algorithm(const std::string& s) {
  if (s == "greedy") return MatchAlgorithm::Greedy;
  if (s == "hungarian") return MatchAlgorithm::Hungarian;
  throw ConfigError("unknown algorithm '" + s + "' (expected greedy|hungarian)");
}

Counterparty parse_counterparty(const std::string& s) {
  for (auto c : {Counterparty::ProsumerToEv, Counterparty::EvToProsumer, Counterparty::ProsumerToGrid,
                 Counterparty::GridToProsumer}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown counterparty '" + s + "'");
}

std::string format_real(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || s.empty()) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  return v;
}

std::string format_fixed(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  double r = std::floor(v * scale + 0.5) / scale;
  if (r == 0.0) r = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

}  // namespace v2g
