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

#include "v2g/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "v2g/csv.hpp"

namespace v2g {
namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed: " + path.string());
}

void write_exchange_csv(const std::vector<TradeEvent>& trades, std::ostream& out) {
  out << kExchangeHeader << '\n';
  for (const auto& e : trades) {
    out << e.t.seconds << ',' << format_real(e.energy_kwh) << ',';
    if (e.in_system()) {
      out << format_real(e.ev_available_kwh_after) << ',' << format_real(e.ev_headroom_kwh_after);
    } else {
      out << ',';
    }
    out << ',' << e.matching_id << ',' << e.prosumer_id << ',' << e.ev_id << ',' << format_real(e.price_p_per_kwh)
        << ',' << to_string(e.counterparty) << '\n';
  }
}

std::vector<TradeEvent> read_exchange_csv(std::istream& in) {
  CsvReader reader(in, CsvReader::split(kExchangeHeader));
  std::vector<TradeEvent> out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    try {
      TradeEvent e;
      e.t = Timestamp{parse_int(row[0])};
      e.energy_kwh = parse_real(row[1]);
      e.matching_id = row[4];
      e.prosumer_id = row[5];
      e.ev_id = row[6];
      e.price_p_per_kwh = parse_real(row[7]);
      e.counterparty = parse_counterparty(row[8]);
      if (e.in_system()) {
        e.ev_available_kwh_after = parse_real(row[2]);
        e.ev_headroom_kwh_after = parse_real(row[3]);
      } else if (!row[2].empty() || !row[3].empty() || !e.ev_id.empty()) {
        throw ConfigError("grid trade carries EV fields");
      }
      switch (e.counterparty) {
        case Counterparty::ProsumerToEv:
          e.seller_id = e.prosumer_id;
          e.buyer_id = e.ev_id;
          break;
        case Counterparty::EvToProsumer:
          e.seller_id = e.ev_id;
          e.buyer_id = e.prosumer_id;
          break;
        case Counterparty::ProsumerToGrid:
          e.seller_id = e.prosumer_id;
          e.buyer_id = kGridMatchingId;
          break;
        case Counterparty::GridToProsumer:
          e.seller_id = kGridMatchingId;
          e.buyer_id = e.prosumer_id;
          break;
      }
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw ConfigError("exchange.csv line " + std::to_string(reader.line()) + ": " + ex.what());
    }
  }
  return out;
}

void write_period_costs_csv(const std::vector<PeriodCosts>& costs, std::ostream& out) {
  out << "period,market,greedy_cost_kwh,hungarian_cost_kwh,chosen_cost_kwh\n";
  for (const auto& c : costs) {
    out << c.period << ',' << c.market << ',' << format_real(c.greedy_cost_kwh) << ','
        << format_real(c.hungarian_cost_kwh) << ',' << format_real(c.chosen_cost_kwh) << '\n';
  }
}

std::vector<PeriodCosts> read_period_costs_csv(std::istream& in) {
  CsvReader reader(in, {"period", "market", "greedy_cost_kwh", "hungarian_cost_kwh", "chosen_cost_kwh"});
  std::vector<PeriodCosts> out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    out.push_back({parse_int(row[0]), row[1], parse_real(row[2]), parse_real(row[3]), parse_real(row[4])});
  }
  return out;
}

RunIdentity identity_of(const ScenarioConfig& cfg) {
  std::ostringstream load, fleet;
  write_load_csv(cfg.dataset, load);
  write_itineraries_csv(cfg.fleet, fleet);
  RunIdentity id;
  id.dataset_digest = to_hex(sha256(load.str())) + "@" + std::to_string(cfg.matching_period_s) + "s";
  id.fleet_digest = to_hex(sha256(fleet.str())) + "@" + format_real(cfg.driving_kw) + "kW";
  id.seeds = "market=" + std::to_string(cfg.seeds.market) + ";model=" + std::to_string(cfg.seeds.model) +
             ";K=" + std::to_string(cfg.aggregation_period);
  id.tariffs = "p_gb=" + format_real(cfg.tariffs.p_gb) + ";p_gs=" + format_real(cfg.tariffs.p_gs) +
               ";basis=" + format_real(cfg.initial_basis()) +
               (cfg.max_step_kwh ? ";cap=" + format_real(*cfg.max_step_kwh) : std::string());
  id.scenario = cfg.scenario_label();
  id.algorithm = to_string(cfg.algorithm);
  id.forecaster = to_string(cfg.forecaster);
  return id;
}

Json identity_to_json(const RunIdentity& id) {
  return Json{{"dataset", id.dataset_digest}, {"fleet", id.fleet_digest}, {"seeds", id.seeds},
              {"tariffs", id.tariffs},        {"scenario", id.scenario},   {"algorithm", id.algorithm},
              {"forecaster", id.forecaster}};
}

RunIdentity identity_from_json(const Json& j) {
  try {
    return RunIdentity{j.at("dataset").get<std::string>(),  j.at("fleet").get<std::string>(),
                       j.at("seeds").get<std::string>(),    j.at("tariffs").get<std::string>(),
                       j.at("scenario").get<std::string>(), j.at("algorithm").get<std::string>(),
                       j.at("forecaster").get<std::string>()};
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("manifest identity: ") + e.what());
  }
}

RunReport report_of(const RunArtifacts& run) {
  std::map<AgentId, double> basis;
  for (const auto& ev : run.evs) basis[ev] = run.config.initial_basis();
  return build_run_report(run.config.dataset, run.prosumers, basis, run.config.tariffs, run.trades);
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json write_run_dir(const fs::path& dir, const RunArtifacts& run, const RunReport& report, const Json& scenario) {
  fs::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> files;

  std::ostringstream exchange, anchors, payloads, report_csv, costs;
  write_exchange_csv(run.trades, exchange);
  write_anchors_csv(run.anchors, anchors);
  write_payloads(run.payloads, payloads);
  write_report_csv(report, report_csv);
  write_period_costs_csv(run.period_costs, costs);
  files.emplace_back("exchange.csv", exchange.str());
  files.emplace_back("anchors.csv", anchors.str());
  files.emplace_back("payloads.bin", payloads.str());
  files.emplace_back("report.csv", report_csv.str());
  files.emplace_back("period_costs.csv", costs.str());
  if (run.config.dump_costs) {
    files.emplace_back("costs.csv", "period,market,row_id,col_id,cost_kwh\n" + run.cost_dump);
  }
  if (run.federated) {
    files.emplace_back("lstm_global.bin", encode_checkpoint(run.federated->final_global));
  }

  double min_ev = 0.0;
  for (std::size_t i = 0; i < report.evs.size(); ++i) {
    min_ev = i == 0 ? report.evs[i].money_benefit_p : std::min(min_ev, report.evs[i].money_benefit_p);
  }
  double grid = 0.0;
  for (const auto& p : report.prosumers) grid += p.scenario_grid_kwh;
  Json summary{{"scenario", run.config.scenario_label()},
               {"algorithm", to_string(run.config.algorithm)},
               {"forecaster", to_string(run.config.forecaster)},
               {"trades", run.trades.size()},
               {"in_system_kwh", report.total_in_system_kwh()},
               {"scenario_grid_kwh", grid},
               {"min_in_system_price_p_per_kwh", optional_number(report.min_in_system_price)},
               {"max_in_system_price_p_per_kwh", optional_number(report.max_in_system_price)},
               {"min_ev_money_benefit_p", min_ev},
               {"money_residual_p", report.money_residual_p},
               {"benefit_identity_residual_kwh", report.benefit_identity_residual_kwh},
               {"max_energy_residual_kwh", run.checks.max_energy_residual_kwh},
               {"battery_violations", run.checks.battery_violations},
               {"steps", run.checks.steps},
               {"periods", run.checks.periods},
               {"voided_matchings", run.checks.voided_matchings}};
  if (run.federated) {
    std::size_t fallbacks = 0;
    for (const auto& row : run.federated->forecasts) {
      for (const auto& f : row) fallbacks += f.fallback ? 1 : 0;
    }
    summary["federated"] = {{"publishes", run.federated->publishes.size()},
                            {"rejected_steps", run.federated->rejected_steps},
                            {"fallback_forecasts", fallbacks},
                            {"final_version", run.federated->final_global.version}};
  }
  files.emplace_back("run_summary.json", summary.dump(2) + "\n");

  Json digests = Json::object();
  for (const auto& [name, bytes] : files) {
    write_file(dir / name, bytes);
    digests[name] = to_hex(sha256(bytes));
  }
  Json manifest{{"format", "v2gsim-run/1"},
                {"scenario", scenario},
                {"identity", identity_to_json(identity_of(run.config))},
                {"seeds", {{"market", run.config.seeds.market}, {"model", run.config.seeds.model}}},
                {"prosumers", run.prosumers},
                {"evs", run.evs},
                {"initial_cost_basis_p_per_kwh", run.config.initial_basis()},
                {"ledger_head", to_hex(run.ledger_head)},
                {"artifacts", digests}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

Json read_manifest(const fs::path& dir) {
  try {
    return Json::parse(read_file(dir / "manifest.json"));
  } catch (const Json::exception& e) {
    throw ConfigError("manifest.json: " + std::string(e.what()));
  }
}

RunCheck verify_run_dir(const fs::path& dir) {
  auto fail = [](std::string msg, std::optional<std::size_t> anchor = std::nullopt) {
    return RunCheck{false, anchor, std::move(msg)};
  };
  Json manifest;
  std::vector<AnchorRecord> anchors;
  std::vector<std::string> payloads;
  std::vector<TradeEvent> exchange;
  Digest head{};
  try {
    manifest = read_manifest(dir);
    head = digest_from_hex(manifest.at("ledger_head").get<std::string>());
    {
      std::istringstream in(read_file(dir / "anchors.csv"));
      anchors = read_anchors_csv(in);
    }
    {
      std::istringstream in(read_file(dir / "payloads.bin"));
      payloads = read_payloads(in);
    }
    std::istringstream in(read_file(dir / "exchange.csv"));
    exchange = read_exchange_csv(in);
  } catch (const std::exception& e) {
    return fail(e.what());
  }

  const ChainVerdict v = verify_chain(anchors, payloads, head);
  if (!v.ok) return fail("anchor " + std::to_string(*v.first_broken) + ": " + v.reason, v.first_broken);

  std::vector<TradeEvent> logged;
  try {
    logged = decode_trades(anchors, payloads);
  } catch (const std::exception& e) {
    return fail(std::string("management payload undecodable: ") + e.what());
  }
  if (logged.size() != exchange.size()) {
    return fail("exchange.csv has " + std::to_string(exchange.size()) + " rows but the ledger holds " +
                std::to_string(logged.size()) + " trades");
  }
  for (std::size_t i = 0; i < logged.size(); ++i) {
    if (!(logged[i] == exchange[i])) {
      return fail("exchange.csv row " + std::to_string(i + 2) + " differs from the ledger");
    }
  }

  try {
    for (const auto& [name, digest] : manifest.at("artifacts").items()) {
      if (to_hex(sha256(read_file(dir / name))) != digest.get<std::string>()) {
        return fail(name + ": digest differs from manifest");
      }
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return {};
}

RunReport rebuild_report(const fs::path& dir) {
  const Json manifest = read_manifest(dir);
  const ScenarioConfig cfg = build_scenario(manifest.at("scenario"), dir);
  std::istringstream in(read_file(dir / "exchange.csv"));
  const auto trades = read_exchange_csv(in);
  std::map<AgentId, double> basis;
  for (const auto& ev : manifest.at("evs")) {
    basis[ev.get<std::string>()] = manifest.at("initial_cost_basis_p_per_kwh").get<double>();
  }
  return build_run_report(cfg.dataset, manifest.at("prosumers").get<std::vector<AgentId>>(), basis, cfg.tariffs,
                          trades);
}

}  // namespace v2g
