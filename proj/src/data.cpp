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

#include "v2g/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "v2g/csv.hpp"
#include "v2g/rng.hpp"

namespace v2g {

std::vector<AgentId> LoadDataset::agent_ids() const {
  std::vector<AgentId> ids;
  ids.reserve(agents.size());
  for (const auto& [id, _] : agents) ids.push_back(id);
  return ids;
}

const std::vector<EnergyRecord>& LoadDataset::records(const AgentId& id) const {
  auto it = agents.find(id);
  if (it == agents.end()) throw ConfigError("unknown agent '" + id + "'");
  return it->second;
}

void LoadDataset::validate(std::int64_t matching_period_s) const {
  if (resolution_s <= 0) throw ConfigError("resolution must be positive");
  if (horizon_s <= 0 || horizon_s % resolution_s != 0) {
    throw ConfigError("horizon " + std::to_string(horizon_s) + " s is not a positive multiple of " +
                      std::to_string(resolution_s) + " s");
  }
  if (matching_period_s > 0 && horizon_s % matching_period_s != 0) {
    throw ConfigError("horizon " + std::to_string(horizon_s) + " s is not divisible by matching period " +
                      std::to_string(matching_period_s) + " s");
  }
  const std::size_t n = steps();
  for (const auto& [id, recs] : agents) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t expect = static_cast<std::int64_t>(i) * resolution_s;
      if (i >= recs.size() || recs[i].t.seconds != expect) {
        throw ConfigError("gap at t=" + std::to_string(expect) + " for agent " + id);
      }
      const auto& r = recs[i];
      if (!std::isfinite(r.production_kwh) || !std::isfinite(r.consumption_kwh) ||
          r.production_kwh < 0.0 || r.consumption_kwh < 0.0) {
        throw ConfigError("negative or non-finite energy at t=" + std::to_string(expect) +
                          " for agent " + id);
      }
    }
    if (recs.size() != n) {
      throw ConfigError("agent " + id + " has records beyond the horizon");
    }
  }
}

LoadDataset parse_load_csv(std::istream& in, std::int64_t resolution_s) {
  CsvReader reader(in, {"agent_id", "t_s", "production_kwh", "consumption_kwh"});
  LoadDataset ds;
  ds.resolution_s = resolution_s;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const std::size_t line = reader.line();
    auto fail = [&](const std::string& what) {
      throw ConfigError("row " + std::to_string(line) + ": " + what);
    };
    EnergyRecord rec;
    rec.agent_id = row[0];
    if (rec.agent_id.empty()) fail("empty agent_id");
    try {
      rec.t = Timestamp{parse_int(row[1])};
      rec.production_kwh = parse_real(row[2]);
      rec.consumption_kwh = parse_real(row[3]);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
    if (!std::isfinite(rec.production_kwh) || rec.production_kwh < 0.0) {
      fail("production_kwh must be finite and non-negative");
    }
    if (!std::isfinite(rec.consumption_kwh) || rec.consumption_kwh < 0.0) {
      fail("consumption_kwh must be finite and non-negative");
    }
    if (rec.t.seconds < 0 || !rec.t.aligned_to(resolution_s)) {
      fail("t_s " + std::to_string(rec.t.seconds) + " not aligned to " + std::to_string(resolution_s) + " s");
    }
    auto& recs = ds.agents[rec.agent_id];
    const std::int64_t expect =
        recs.empty() ? 0 : recs.back().t.seconds + resolution_s;
    if (!recs.empty() && rec.t <= recs.back().t) {
      fail("non-monotone timestamp " + std::to_string(rec.t.seconds) + " for agent " + rec.agent_id);
    }
    if (rec.t.seconds != expect) {
      throw ConfigError("gap at t=" + std::to_string(expect) + " for agent " + rec.agent_id);
    }
    recs.push_back(std::move(rec));
  }
  if (ds.agents.empty()) throw ConfigError("load file has no rows");
  std::size_t longest = 0;
  for (const auto& [_, recs] : ds.agents) longest = std::max(longest, recs.size());
  ds.horizon_s = static_cast<std::int64_t>(longest) * resolution_s;
  ds.validate();
  return ds;
}

LoadDataset load_csv(const std::filesystem::path& path, std::int64_t resolution_s) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open load file " + path.string());
  return parse_load_csv(in, resolution_s);
}

void write_load_csv(const LoadDataset& ds, std::ostream& out) {
  out << "agent_id,t_s,production_kwh,consumption_kwh\n";
  for (const auto& [id, recs] : ds.agents) {
    for (const auto& r : recs) {
      out << id << ',' << r.t.seconds << ',' << format_real(r.production_kwh) << ','
          << format_real(r.consumption_kwh) << '\n';
    }
  }
}

void write_load_csv(const LoadDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_load_csv(ds, out);
}

std::vector<EnergyRecord> generate_pv_profile(const AgentId& agent_id, const SyntheticPvParams& params,
                                              std::int64_t horizon_s, std::int64_t resolution_s) {
  if (resolution_s <= 0 || horizon_s < 0 || horizon_s % resolution_s != 0) {
    throw ConfigError("horizon must be a non-negative multiple of the resolution");
  }
  if (!(params.sunrise_s < params.sunset_s)) throw ConfigError("sunrise must precede sunset");
  if (params.peak_production_kw < 0.0 || params.base_consumption_kw < 0.0) {
    throw ConfigError("synthetic powers must be non-negative");
  }
  if (params.consumption_noise_frac < 0.0 || params.consumption_noise_frac >= 1.0) {
    throw ConfigError("consumption_noise_frac must lie in [0, 1)");
  }
  Rng rng(params.rng_seed);
  const double hours_per_step = static_cast<double>(resolution_s) / 3600.0;
  const double daylight = static_cast<double>(params.sunset_s - params.sunrise_s);
  std::vector<EnergyRecord> out;
  out.reserve(static_cast<std::size_t>(horizon_s / resolution_s));
  for (std::int64_t t = 0; t < horizon_s; t += resolution_s) {
    EnergyRecord r;
    r.agent_id = agent_id;
    r.t = Timestamp{t};
    const std::int64_t tod = r.t.seconds_of_day();
    double pv_kw = 0.0;
    if (tod >= params.sunrise_s && tod <= params.sunset_s) {
      const double phase = static_cast<double>(tod - params.sunrise_s) / daylight;
      pv_kw = std::max(0.0, params.peak_production_kw * std::sin(std::numbers::pi * phase));
    }
    r.production_kwh = pv_kw * hours_per_step;
    // Always draw so the noise stream is independent of the noise amplitude.
    const double u = rng.uniform(-1.0, 1.0);
    r.consumption_kwh =
        params.base_consumption_kw * (1.0 + params.consumption_noise_frac * u) * hours_per_step;
    out.push_back(std::move(r));
  }
  return out;
}

LoadDataset generate_dataset(const std::vector<std::pair<AgentId, SyntheticPvParams>>& agents,
                             std::int64_t horizon_s, std::int64_t resolution_s) {
  LoadDataset ds;
  ds.resolution_s = resolution_s;
  ds.horizon_s = horizon_s;
  for (const auto& [id, params] : agents) {
    if (ds.agents.count(id)) throw ConfigError("duplicate agent '" + id + "'");
    ds.agents[id] = generate_pv_profile(id, params, horizon_s, resolution_s);
  }
  ds.validate();
  return ds;
}

double derive_reserve_kwh(const EvItinerary& itinerary, std::int64_t horizon_s, double driving_kw,
                          double reserve_days) {
  if (horizon_s <= 0) return 0.0;
  std::int64_t present = 0;
  for (const auto& iv : itinerary.presence) {
    const auto a = std::clamp<std::int64_t>(iv.arrive.seconds, 0, horizon_s);
    const auto d = std::clamp<std::int64_t>(iv.depart.seconds, 0, horizon_s);
    present += d - a;
  }
  const double days = static_cast<double>(horizon_s) / 86400.0;
  const double mean_daily = driving_energy_kwh(horizon_s - present, driving_kw) / days;
  return reserve_days * mean_daily;
}

EvSpec generate_ev_itinerary(const AgentId& ev_id, const EvGenParams& params) {
  if (params.away_blocks_per_day < 0) throw ConfigError("away_blocks_per_day must be >= 0");
  if (params.horizon_s <= 0 || params.horizon_s % kItineraryResolutionS != 0) {
    throw ConfigError("itinerary horizon must be a positive multiple of 900 s");
  }
  constexpr std::int64_t kQuarter = kItineraryResolutionS;
  // Trips are placed between 06:00 and 22:00, one per equal-width slot.
  constexpr std::int64_t kWindowStart = 6 * 3600 / kQuarter;
  constexpr std::int64_t kWindowQuarters = 16 * 3600 / kQuarter;
  const std::int64_t blocks = params.away_blocks_per_day;
  if (blocks > kWindowQuarters / 2) {
    throw ConfigError("at most " + std::to_string(kWindowQuarters / 2) + " away blocks per day");
  }

  Rng rng(params.seed);
  std::vector<PresenceInterval> away;
  const std::int64_t days = (params.horizon_s + 86399) / 86400;
  for (std::int64_t day = 0; day < days && blocks > 0; ++day) {
    const std::int64_t slot = kWindowQuarters / blocks;
    for (std::int64_t b = 0; b < blocks; ++b) {
      const std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(2));
      const std::int64_t start_q =
          kWindowStart + b * slot + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(slot - len + 1)));
      const std::int64_t start = day * 86400 + start_q * kQuarter;
      const std::int64_t end = std::min(start + len * kQuarter, params.horizon_s);
      if (start < end) away.push_back({Timestamp{start}, Timestamp{end}});
    }
  }

  EvSpec spec;
  spec.itinerary.ev_id = ev_id;
  std::int64_t cursor = 0;
  for (const auto& a : away) {
    if (cursor < a.arrive.seconds) spec.itinerary.presence.push_back({Timestamp{cursor}, a.arrive});
    cursor = a.depart.seconds;
  }
  if (cursor < params.horizon_s) {
    spec.itinerary.presence.push_back({Timestamp{cursor}, Timestamp{params.horizon_s}});
  }
  spec.itinerary.validate();

  spec.battery.c_total_kwh = params.c_total_kwh;
  spec.battery.reserve_kwh =
      derive_reserve_kwh(spec.itinerary, params.horizon_s, params.driving_kw, params.reserve_days);
  const double floor = spec.battery.floor_kwh();
  const double ceiling = spec.battery.ceiling_kwh();
  if (!(floor < ceiling)) {
    spec.battery.soc_kwh = floor;
    throw ConfigError("EV " + ev_id + " rejected: " + *validate_battery(spec.battery));
  }
  spec.battery.soc_kwh = rng.uniform(floor, ceiling);
  spec.itinerary.initial_soc_kwh = spec.battery.soc_kwh;
  return spec;
}

std::vector<EvSpec> parse_itineraries_csv(std::istream& in) {
  CsvReader reader(in, {"ev_id", "arrive_s", "depart_s", "initial_soc_kwh", "c_total_kwh", "reserve_kwh"});
  std::vector<EvSpec> fleet;
  std::map<AgentId, std::size_t> index;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const std::size_t line = reader.line();
    try {
      const AgentId& id = row[0];
      if (id.empty()) throw ConfigError("empty ev_id");
      PresenceInterval iv{Timestamp{parse_int(row[1])}, Timestamp{parse_int(row[2])}};
      const double soc = parse_real(row[3]);
      const double c_total = parse_real(row[4]);
      const double reserve = parse_real(row[5]);
      auto [it, inserted] = index.try_emplace(id, fleet.size());
      if (inserted) {
        EvSpec spec;
        spec.itinerary.ev_id = id;
        spec.itinerary.initial_soc_kwh = soc;
        spec.battery = Battery{c_total, reserve, soc, 0.0};
        fleet.push_back(std::move(spec));
      }
      auto& spec = fleet[it->second];
      if (spec.battery.c_total_kwh != c_total || spec.battery.reserve_kwh != reserve ||
          spec.itinerary.initial_soc_kwh != soc) {
        throw ConfigError("battery fields differ between rows of " + id);
      }
      spec.itinerary.presence.push_back(iv);
    } catch (const ConfigError& e) {
      throw ConfigError("row " + std::to_string(line) + ": " + e.what());
    }
  }
  for (const auto& spec : fleet) {
    spec.itinerary.validate();
    if (auto err = validate_battery(spec.battery)) {
      throw ConfigError("EV " + spec.itinerary.ev_id + ": " + *err);
    }
  }
  return fleet;
}

std::vector<EvSpec> load_itineraries_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open itinerary file " + path.string());
  return parse_itineraries_csv(in);
}

void write_itineraries_csv(const std::vector<EvSpec>& fleet, std::ostream& out) {
  out << "ev_id,arrive_s,depart_s,initial_soc_kwh,c_total_kwh,reserve_kwh\n";
  for (const auto& spec : fleet) {
    for (const auto& iv : spec.itinerary.presence) {
      out << spec.itinerary.ev_id << ',' << iv.arrive.seconds << ',' << iv.depart.seconds << ','
          << format_real(spec.itinerary.initial_soc_kwh) << ',' << format_real(spec.battery.c_total_kwh)
          << ',' << format_real(spec.battery.reserve_kwh) << '\n';
    }
  }
}

void write_itineraries_csv(const std::vector<EvSpec>& fleet, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_itineraries_csv(fleet, out);
}

std::vector<std::pair<AgentId, SyntheticPvParams>> reference_agents() {
  // Sun up 05:00-19:00 so production peaks at 12:00 (step 4320 at 10 s).
  constexpr std::int64_t kRise = 5 * 3600;
  constexpr std::int64_t kSet = 19 * 3600;
  return {
      {"L1", {2.5, 1.0, 0.35, kRise, kSet, 1001}},
      {"L2", {0.0, 2.2, 0.35, kRise, kSet, 1002}},
      {"L3", {2.0, 0.6, 0.35, kRise, kSet, 1003}},
      {"R2", {3.0, 0.5, 0.35, kRise, kSet, 1004}},
      {"Z0", {9.0, 1.2, 0.35, kRise, kSet, 1005}},
  };
}

std::vector<EvSpec> reference_fleet(std::int64_t horizon_s) {
  std::vector<EvSpec> fleet;
  for (int i = 0; i < 5; ++i) {
    EvGenParams p;
    p.seed = 2001 + static_cast<std::uint64_t>(i);
    p.horizon_s = horizon_s;
    p.away_blocks_per_day = 1;
    fleet.push_back(generate_ev_itinerary("EV" + std::to_string(i + 1), p));
  }
  return fleet;
}

}  // namespace v2g
