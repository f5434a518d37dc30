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

#include <gtest/gtest.h>

#include <sstream>

#include "v2g/data.hpp"
#include "v2g/rng.hpp"

namespace v2g {
namespace {

std::string minimal_csv() {
  std::ostringstream s;
  s << "agent_id,t_s,production_kwh,consumption_kwh\n";
  for (const char* a : {"A", "B"}) {
    for (int t = 0; t < 60; t += 10) s << a << ',' << t << ",0.001,0.002\n";
  }
  return s.str();
}

std::string expect_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_load_csv(in);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadCsv, MinimalWellFormedFile) {
  std::istringstream in(minimal_csv());
  const LoadDataset ds = parse_load_csv(in);
  EXPECT_EQ(ds.horizon_s, 60);
  EXPECT_EQ(ds.agents.size(), 2u);
  EXPECT_EQ(ds.records("A").size(), 6u);
  EXPECT_EQ(ds.steps(), 6u);
}

TEST(LoadCsv, MissingSlotNamesGap) {
  const std::string text =
      "agent_id,t_s,production_kwh,consumption_kwh\nA,0,0,0\nA,10,0,0\nA,20,0,0\nA,40,0,0\n";
  EXPECT_EQ(expect_error(text), "gap at t=30 for agent A");
}

TEST(LoadCsv, NegativeProductionNamesRow) {
  const std::string text = "agent_id,t_s,production_kwh,consumption_kwh\nA,0,0,0\nA,10,-1,0\n";
  const std::string err = expect_error(text);
  EXPECT_NE(err.find("row 3"), std::string::npos) << err;
  EXPECT_NE(err.find("production_kwh"), std::string::npos) << err;
}

TEST(LoadCsv, MissingColumn) {
  const std::string err = expect_error("agent_id,t_s,production_kwh\nA,0,0\n");
  EXPECT_NE(err.find("consumption_kwh"), std::string::npos) << err;
}

TEST(LoadCsv, NonMonotoneTimestamps) {
  const std::string err = expect_error("agent_id,t_s,production_kwh,consumption_kwh\nA,0,0,0\nA,10,0,0\nA,10,0,0\n");
  EXPECT_NE(err.find("non-monotone"), std::string::npos) << err;
}

TEST(LoadCsv, UnequalGridsRejected) {
  const std::string err =
      expect_error("agent_id,t_s,production_kwh,consumption_kwh\nA,0,0,0\nA,10,0,0\nB,0,0,0\n");
  EXPECT_NE(err.find("gap at t=10 for agent B"), std::string::npos) << err;
}

TEST(LoadCsv, CanonicalRoundTripIsByteIdentical) {
  const LoadDataset ds = generate_dataset(reference_agents(), 3600);
  std::ostringstream first;
  write_load_csv(ds, first);
  std::istringstream in(first.str());
  std::ostringstream second;
  write_load_csv(parse_load_csv(in), second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(Dataset, ValidateRequiresWholeMatchingPeriods) {
  std::istringstream in(minimal_csv());
  const LoadDataset ds = parse_load_csv(in);
  EXPECT_NO_THROW(ds.validate(60));
  EXPECT_THROW(ds.validate(40), ConfigError);
}

TEST(PvProfile, ZeroPeakIsPureConsumer) {
  SyntheticPvParams p;
  p.base_consumption_kw = 2.0;
  p.consumption_noise_frac = 0.3;
  for (const auto& r : generate_pv_profile("L2", p, 86400)) {
    EXPECT_EQ(r.production_kwh, 0.0);
    EXPECT_GT(r.consumption_kwh, 0.0);
  }
}

TEST(PvProfile, ConstantLoadArithmetic) {
  SyntheticPvParams p;
  p.base_consumption_kw = 1.0;
  for (const auto& r : generate_pv_profile("A", p, 3600)) EXPECT_DOUBLE_EQ(r.consumption_kwh, 1.0 / 360.0);
}

TEST(PvProfile, SameSeedIsBitwiseIdentical) {
  SyntheticPvParams p{3.0, 1.0, 0.4, 5 * 3600, 19 * 3600, 77};
  const auto a = generate_pv_profile("A", p, 86400);
  const auto b = generate_pv_profile("A", p, 86400);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].production_kwh, b[i].production_kwh);
    EXPECT_EQ(a[i].consumption_kwh, b[i].consumption_kwh);
  }
}

TEST(PvProfile, NoProductionOutsideDaylightAndMiddayPeak) {
  SyntheticPvParams p{4.0, 0.5, 0.0, 6 * 3600, 18 * 3600, 1};
  const auto recs = generate_pv_profile("A", p, 86400);
  double best = -1.0;
  std::int64_t best_t = 0;
  for (const auto& r : recs) {
    const auto tod = r.t.seconds_of_day();
    if (tod < p.sunrise_s || tod > p.sunset_s) EXPECT_EQ(r.production_kwh, 0.0);
    if (r.production_kwh > best) {
      best = r.production_kwh;
      best_t = r.t.seconds;
    }
  }
  EXPECT_EQ(best_t, 12 * 3600);
  EXPECT_NEAR(best, 4.0 / 360.0, 1e-15);
}

TEST(PvProfile, PropertyGeneratedDatasetsAreValid) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<AgentId, SyntheticPvParams>> agents;
    const int n = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < n; ++i) {
      SyntheticPvParams p;
      p.peak_production_kw = rng.uniform(0.0, 10.0);
      p.base_consumption_kw = rng.uniform(0.0, 3.0);
      p.consumption_noise_frac = rng.uniform(0.0, 0.99);
      p.sunrise_s = static_cast<std::int64_t>(rng.below(43200));
      p.sunset_s = p.sunrise_s + 1 + static_cast<std::int64_t>(rng.below(43000));
      p.rng_seed = rng.next_u64();
      agents.emplace_back("A" + std::to_string(i), p);
    }
    const std::int64_t horizon = 60 * (1 + static_cast<std::int64_t>(rng.below(200)));
    const LoadDataset ds = generate_dataset(agents, horizon);
    EXPECT_NO_THROW(ds.validate(60));
  }
}

TEST(EvItineraryGen, NoTripsMeansNoReserve) {
  EvGenParams g;
  g.seed = 1;
  g.away_blocks_per_day = 0;
  const EvSpec ev = generate_ev_itinerary("EV1", g);
  ASSERT_EQ(ev.itinerary.presence.size(), 1u);
  EXPECT_EQ(ev.itinerary.presence[0].arrive.seconds, 0);
  EXPECT_EQ(ev.itinerary.presence[0].depart.seconds, 86400);
  EXPECT_EQ(ev.battery.reserve_kwh, 0.0);
}

TEST(EvItineraryGen, CeilingFixedByCapacity) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    EvGenParams g;
    g.seed = seed;
    g.away_blocks_per_day = static_cast<int>(seed % 3);
    g.driving_kw = 1.5;
    const EvSpec ev = generate_ev_itinerary("EV", g);
    EXPECT_DOUBLE_EQ(ev.battery.ceiling_kwh(), 63.6);
    EXPECT_NO_THROW(ev.itinerary.validate());
    EXPECT_FALSE(validate_battery(ev.battery).has_value());
    EXPECT_EQ(ev.battery.soc_kwh, ev.itinerary.initial_soc_kwh);
  }
}

TEST(EvItineraryGen, SameSeedIsIdentical) {
  EvGenParams g;
  g.seed = 99;
  g.away_blocks_per_day = 2;
  g.driving_kw = 1.0;
  const EvSpec a = generate_ev_itinerary("EV", g);
  const EvSpec b = generate_ev_itinerary("EV", g);
  ASSERT_EQ(a.itinerary.presence.size(), b.itinerary.presence.size());
  for (std::size_t i = 0; i < a.itinerary.presence.size(); ++i) {
    EXPECT_EQ(a.itinerary.presence[i].arrive, b.itinerary.presence[i].arrive);
    EXPECT_EQ(a.itinerary.presence[i].depart, b.itinerary.presence[i].depart);
  }
  EXPECT_EQ(a.battery.soc_kwh, b.battery.soc_kwh);
}

TEST(EvItineraryGen, ReserveIsAWeekOfMeanDailyDriving) {
  EvGenParams g;
  g.seed = 5;
  g.away_blocks_per_day = 1;
  const EvSpec ev = generate_ev_itinerary("EV", g);
  std::int64_t present = 0;
  for (const auto& iv : ev.itinerary.presence) present += iv.depart.seconds - iv.arrive.seconds;
  const double daily = 7.5 * static_cast<double>(86400 - present) / 3600.0;
  EXPECT_NEAR(ev.battery.reserve_kwh, 7.0 * daily, 1e-12);
}

TEST(EvItineraryGen, UntradeableBatteryRejected) {
  EvGenParams g;
  g.seed = 1;
  g.away_blocks_per_day = 4;
  g.driving_kw = 50.0;
  try {
    generate_ev_itinerary("EVX", g);
    FAIL() << "expected rejection";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("EVX rejected: floor"), std::string::npos) << e.what();
  }
}

TEST(Itineraries, CsvRoundTrip) {
  const auto fleet = reference_fleet();
  std::ostringstream first;
  write_itineraries_csv(fleet, first);
  std::istringstream in(first.str());
  const auto back = parse_itineraries_csv(in);
  ASSERT_EQ(back.size(), fleet.size());
  std::ostringstream second;
  write_itineraries_csv(back, second);
  EXPECT_EQ(first.str(), second.str());
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    EXPECT_EQ(back[i].battery.reserve_kwh, fleet[i].battery.reserve_kwh);
    EXPECT_EQ(back[i].itinerary.initial_soc_kwh, fleet[i].itinerary.initial_soc_kwh);
  }
}

TEST(ReferenceFixture, HeterogeneousAgents) {
  const LoadDataset ds = generate_dataset(reference_agents(), 86400);
  ASSERT_EQ(ds.agents.size(), 5u);
  double produced_l2 = 0.0;
  std::vector<double> production;
  for (const auto& [id, recs] : ds.agents) {
    double p = 0.0;
    for (const auto& r : recs) p += r.production_kwh;
    if (id == "L2") produced_l2 = p;
    production.push_back(p);
  }
  EXPECT_EQ(produced_l2, 0.0);
  std::sort(production.rbegin(), production.rend());
  EXPECT_GE(production[0], 2.5 * production[1]);
}

}  // namespace
}  // namespace v2g
