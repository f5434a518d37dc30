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

#include "v2g/scenario.hpp"

#include <fstream>
#include <set>

namespace v2g {
namespace fs = std::filesystem;

namespace {

void only_fields(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("field '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) {
      throw ConfigError("unknown field '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

const Json& need(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing field '" + (where.empty() ? key : where + "." + key) + "'");
  return *it;
}

std::string name_of(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

double get_real(const Json& obj, const char* key, const std::string& where, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ConfigError("field '" + name_of(where, key) + "' must be a number");
  return it->get<double>();
}

std::int64_t get_int(const Json& obj, const char* key, const std::string& where, std::int64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) throw ConfigError("field '" + name_of(where, key) + "' must be an integer");
  return it->get<std::int64_t>();
}

std::uint64_t get_seed(const Json& obj, const char* key, const std::string& where, std::uint64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
    throw ConfigError("field '" + name_of(where, key) + "' must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::string get_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = need(obj, key, where);
  if (!v.is_string()) throw ConfigError("field '" + name_of(where, key) + "' must be a string");
  return v.get<std::string>();
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

LoadDataset build_dataset(const Json& d, const fs::path& base, std::int64_t resolution_s) {
  only_fields(d, "dataset", {"path", "preset", "horizon_s"});
  if (d.contains("path") == d.contains("preset")) {
    throw ConfigError("field 'dataset' needs exactly one of 'path' or 'preset'");
  }
  if (d.contains("path")) {
    const fs::path p = resolve(get_string(d, "path", "dataset"), base);
    if (!fs::exists(p)) throw ConfigError("field 'dataset.path': file not found: " + p.string());
    try {
      return load_csv(p, resolution_s);
    } catch (const std::exception& e) {
      throw ConfigError("field 'dataset.path': " + p.string() + ": " + e.what());
    }
  }
  const std::string preset = get_string(d, "preset", "dataset");
  if (preset != "paper5") throw ConfigError("field 'dataset.preset': unknown preset '" + preset + "'");
  const std::int64_t horizon = get_int(d, "horizon_s", "dataset", 86400);
  if (horizon <= 0) throw ConfigError("field 'dataset.horizon_s' must be positive");
  return generate_dataset(reference_agents(), horizon, resolution_s);
}

std::vector<EvSpec> build_fleet(const Json& f, const fs::path& base, std::int64_t horizon_s) {
  only_fields(f, "fleet", {"path", "preset", "synthetic"});
  if (f.size() != 1) throw ConfigError("field 'fleet' needs exactly one of 'path', 'preset' or 'synthetic'");
  if (f.contains("path")) {
    const fs::path p = resolve(get_string(f, "path", "fleet"), base);
    if (!fs::exists(p)) throw ConfigError("field 'fleet.path': file not found: " + p.string());
    try {
      return load_itineraries_csv(p);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("field 'fleet.path': " + p.string() + ": " + e.what());
    }
  }
  if (f.contains("preset")) {
    const std::string preset = get_string(f, "preset", "fleet");
    if (preset != "paper5") throw ConfigError("field 'fleet.preset': unknown preset '" + preset + "'");
    return reference_fleet(horizon_s);
  }
  const Json& s = f.at("synthetic");
  const std::string w = "fleet.synthetic";
  only_fields(s, w, {"count", "seed", "away_blocks_per_day", "c_total_kwh", "driving_kw", "reserve_days"});
  const std::int64_t count = get_int(s, "count", w, 5);
  if (count < 0) throw ConfigError("field 'fleet.synthetic.count' must be non-negative");
  EvGenParams g;
  g.horizon_s = horizon_s;
  g.away_blocks_per_day = static_cast<int>(get_int(s, "away_blocks_per_day", w, g.away_blocks_per_day));
  g.c_total_kwh = get_real(s, "c_total_kwh", w, g.c_total_kwh);
  g.driving_kw = get_real(s, "driving_kw", w, g.driving_kw);
  g.reserve_days = get_real(s, "reserve_days", w, g.reserve_days);
  const std::uint64_t seed = get_seed(s, "seed", w, 2001);
  std::vector<EvSpec> fleet;
  for (std::int64_t i = 0; i < count; ++i) {
    g.seed = seed + static_cast<std::uint64_t>(i);
    fleet.push_back(generate_ev_itinerary("EV" + std::to_string(i + 1), g));
  }
  return fleet;
}

}  // namespace

Json read_scenario_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("scenario file " + path.string() + ": " + e.what());
  }
}

Json resolve_paths(Json doc, const fs::path& base_dir) {
  for (const char* key : {"dataset", "fleet"}) {
    if (!doc.is_object() || !doc.contains(key) || !doc[key].is_object()) continue;
    Json& sect = doc[key];
    if (sect.contains("path") && sect["path"].is_string()) {
      sect["path"] = fs::absolute(resolve(sect["path"].get<std::string>(), base_dir)).lexically_normal().string();
    }
  }
  return doc;
}

ScenarioConfig build_scenario(const Json& doc, const fs::path& base_dir) {
  only_fields(doc, "", {"name", "dataset", "fleet", "scenario", "algorithm", "forecaster", "matching_period_s",
                        "data_resolution_s", "tariffs", "seeds", "aggregation_period", "driving_kw",
                        "initial_cost_basis_p_per_kwh", "max_step_kwh", "fault_injection"});
  ScenarioConfig cfg;
  if (doc.contains("name")) cfg.name = get_string(doc, "name", "");
  cfg.matching_period_s = get_int(doc, "matching_period_s", "", 60);
  cfg.data_resolution_s = get_int(doc, "data_resolution_s", "", 10);
  if (cfg.data_resolution_s <= 0) throw ConfigError("field 'data_resolution_s' must be positive");

  cfg.dataset = build_dataset(need(doc, "dataset", ""), base_dir, cfg.data_resolution_s);
  cfg.fleet = build_fleet(need(doc, "fleet", ""), base_dir, cfg.dataset.horizon_s);

  const Json& sc = need(doc, "scenario", "");
  only_fields(sc, "scenario", {"kind", "evs"});
  const std::string kind = get_string(sc, "kind", "scenario");
  if (kind == "isolated") {
    if (sc.contains("evs")) throw ConfigError("field 'scenario.evs' applies only to shared scenarios");
    cfg.kind = ScenarioKind::Isolated;
  } else if (kind == "shared") {
    cfg.kind = ScenarioKind::Shared;
    const std::int64_t k = get_int(sc, "evs", "scenario", static_cast<std::int64_t>(cfg.fleet.size()));
    if (k < 0) throw ConfigError("field 'scenario.evs' must be non-negative");
    cfg.shared_evs = static_cast<std::size_t>(k);
  } else {
    throw ConfigError("field 'scenario.kind': unknown kind '" + kind + "'");
  }

  cfg.algorithm = parse_algorithm(get_string(doc, "algorithm", ""));
  cfg.forecaster = parse_forecaster(get_string(doc, "forecaster", ""));

  if (doc.contains("tariffs")) {
    const Json& t = doc["tariffs"];
    only_fields(t, "tariffs", {"grid_buy_p_per_kwh", "grid_sell_p_per_kwh"});
    cfg.tariffs.p_gb = get_real(t, "grid_buy_p_per_kwh", "tariffs", cfg.tariffs.p_gb);
    cfg.tariffs.p_gs = get_real(t, "grid_sell_p_per_kwh", "tariffs", cfg.tariffs.p_gs);
  }
  if (doc.contains("seeds")) {
    const Json& s = doc["seeds"];
    only_fields(s, "seeds", {"market", "model"});
    cfg.seeds.market = get_seed(s, "market", "seeds", cfg.seeds.market);
    cfg.seeds.model = get_seed(s, "model", "seeds", cfg.seeds.model);
  }
  cfg.aggregation_period = get_int(doc, "aggregation_period", "", cfg.aggregation_period);
  cfg.driving_kw = get_real(doc, "driving_kw", "", cfg.driving_kw);
  if (doc.contains("initial_cost_basis_p_per_kwh")) {
    cfg.initial_cost_basis = get_real(doc, "initial_cost_basis_p_per_kwh", "", 0.0);
  }
  if (doc.contains("max_step_kwh") && !doc["max_step_kwh"].is_null()) {
    cfg.max_step_kwh = get_real(doc, "max_step_kwh", "", 0.0);
  }
  if (doc.contains("fault_injection")) {
    const Json& fi = doc["fault_injection"];
    only_fields(fi, "fault_injection", {"battery_fault_period"});
    if (fi.contains("battery_fault_period")) {
      cfg.battery_fault_period = get_int(fi, "battery_fault_period", "fault_injection", 0);
    }
  }
  cfg.validate();
  return cfg;
}

Json with_seed(Json doc, std::uint64_t seed) {
  doc["seeds"] = {{"market", seed}, {"model", seed}};
  return doc;
}

Json reference_scenario() {
  return Json{{"name", "paper5"},
              {"dataset", {{"preset", "paper5"}, {"horizon_s", 86400}}},
              {"fleet", {{"preset", "paper5"}}},
              {"scenario", {{"kind", "shared"}, {"evs", 5}}},
              {"algorithm", "hungarian"},
              {"forecaster", "perfect"},
              {"matching_period_s", 60},
              {"data_resolution_s", 10},
              {"tariffs", {{"grid_buy_p_per_kwh", 29.49}, {"grid_sell_p_per_kwh", 6.4}}},
              {"seeds", {{"market", 7}, {"model", 11}}},
              {"aggregation_period", 15},
              {"driving_kw", 7.5}};
}

}  // namespace v2g
