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

#include "v2g/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "v2g/rng.hpp"

namespace v2g {

const char* to_string(ForecasterKind f) { return f == ForecasterKind::Perfect ? "perfect" : "federated"; }

ForecasterKind parse_forecaster(const std::string& s) {
  if (s == "perfect") return ForecasterKind::Perfect;
  if (s == "federated") return ForecasterKind::Federated;
  throw ConfigError("unknown forecaster '" + s + "'");
}

void ScenarioConfig::validate() const {
  if (data_resolution_s <= 0) throw ConfigError("data_resolution_s must be positive");
  if (matching_period_s <= 0 || matching_period_s % data_resolution_s != 0) {
    throw ConfigError("matching_period_s must be a positive multiple of data_resolution_s");
  }
  if (dataset.resolution_s != data_resolution_s) {
    throw ConfigError("dataset resolution " + std::to_string(dataset.resolution_s) +
                      " s differs from data_resolution_s " + std::to_string(data_resolution_s));
  }
  if (dataset.agents.empty()) throw ConfigError("dataset has no agents");
  if (dataset.horizon_s % matching_period_s != 0) {
    throw ConfigError("dataset horizon is not a whole number of matching periods");
  }
  try {
    dataset.validate(matching_period_s);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
  tariffs.check();
  if (aggregation_period <= 0) throw ConfigError("aggregation_period must be positive");
  if (!(driving_kw >= 0.0)) throw ConfigError("driving_kw must be non-negative");
  if (max_step_kwh && !(*max_step_kwh > 0.0)) throw ConfigError("max_step_kwh must be positive");
  if (initial_cost_basis && !(*initial_cost_basis >= 0.0 && std::isfinite(*initial_cost_basis))) {
    throw ConfigError("initial_cost_basis must be a non-negative number");
  }
  if (kind == ScenarioKind::Shared) {
    if (shared_evs > fleet.size()) {
      throw ConfigError("scenario needs " + std::to_string(shared_evs) + " EVs but the fleet has " +
                        std::to_string(fleet.size()));
    }
  } else if (fleet.empty()) {
    throw ConfigError("isolated scenario needs a fleet template EV");
  }
  for (const auto& ev : fleet) {
    try {
      ev.itinerary.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (auto err = validate_battery(ev.battery)) throw ConfigError("EV " + ev.itinerary.ev_id + ": " + *err);
    if (dataset.agents.count(ev.itinerary.ev_id)) {
      throw ConfigError("id " + ev.itinerary.ev_id + " names both an EV and a prosumer");
    }
  }
}

std::string ScenarioConfig::scenario_label() const {
  if (kind == ScenarioKind::Isolated) return "isolated";
  return std::to_string(shared_evs) + "ev";
}

FogPresence fog_presence_for(const ScenarioConfig& cfg) {
  std::vector<EvItinerary> fog;
  if (cfg.kind == ScenarioKind::Isolated) {
    fog.push_back(cfg.fleet.at(0).itinerary);
  } else {
    for (std::size_t i = 0; i < cfg.shared_evs; ++i) fog.push_back(cfg.fleet[i].itinerary);
  }
  const std::int64_t period_s = cfg.matching_period_s;
  return [fog = std::move(fog), period_s](std::size_t agent, std::int64_t period) {
    if (fog.empty()) return false;
    const Timestamp from{period * period_s};
    return fog[agent % fog.size()].present_for(from, Timestamp{from.seconds + period_s});
  };
}

FederatedTrace federated_trace_for(const ScenarioConfig& cfg) {
  FederatedConfig fc;
  fc.genesis_seed = cfg.seeds.model;
  fc.aggregation_period = cfg.aggregation_period;
  fc.matching_period_s = cfg.matching_period_s;
  return run_federated_forecaster(cfg.dataset, fc, fog_presence_for(cfg));
}

namespace {

std::string context(std::int64_t period, Timestamp t) {
  return "period " + std::to_string(period) + " step t=" + std::to_string(t.seconds) + ": ";
}

}  // namespace

Engine::Engine(ScenarioConfig cfg, std::shared_ptr<const FederatedTrace> trace)
    : cfg_(std::move(cfg)), trace_(std::move(trace)), ledger_(Allowlist{}) {
  cfg_.validate();
  prosumers_ = cfg_.dataset.agent_ids();

  auto add_ev = [&](const EvSpec& spec, const AgentId& id) {
    EvState s;
    s.id = id;
    s.itinerary = spec.itinerary;
    s.itinerary.ev_id = id;
    s.battery = spec.battery;
    s.battery.soc_kwh = spec.itinerary.initial_soc_kwh;
    s.battery.cost_basis_p_per_kwh = cfg_.initial_basis();
    evs_.push_back(std::move(s));
  };
  if (cfg_.kind == ScenarioKind::Isolated) {
    const EvSpec& tmpl = cfg_.fleet.front();
    for (std::size_t i = 0; i < prosumers_.size(); ++i) {
      add_ev(tmpl, tmpl.itinerary.ev_id + "@" + prosumers_[i]);
      markets_.push_back({prosumers_[i], {i}, {i}});
    }
  } else {
    Market m;
    for (std::size_t i = 0; i < prosumers_.size(); ++i) m.prosumers.push_back(i);
    for (std::size_t i = 0; i < cfg_.shared_evs; ++i) {
      add_ev(cfg_.fleet[i], cfg_.fleet[i].itinerary.ev_id);
      m.evs.push_back(i);
    }
    markets_.push_back(std::move(m));
  }

  Allowlist allow;
  for (const auto& p : prosumers_) allow.add(p, AgentRole::Prosumer);
  for (auto& e : evs_) {
    allow.add(e.id, AgentRole::Ev);
    if (auto err = validate_battery(e.battery)) throw ConfigError("EV " + e.id + ": " + *err);
    e.present = e.itinerary.present_at(Timestamp{0});
    out_.evs.push_back(e.id);
    out_.initial_batteries[e.id] = e.battery;
  }
  ledger_ = Ledger(std::move(allow));

  periods_ = cfg_.dataset.horizon_s / cfg_.matching_period_s;
  steps_per_period_ = cfg_.matching_period_s / cfg_.data_resolution_s;
  match_of_.resize(prosumers_.size());

  if (cfg_.forecaster == ForecasterKind::Federated && !trace_) {
    trace_ = std::make_shared<const FederatedTrace>(federated_trace_for(cfg_));
  }
  if (cfg_.forecaster == ForecasterKind::Perfect) trace_.reset();
  if (trace_) {
    if (trace_->agents != prosumers_ || trace_->forecasts.size() != static_cast<std::size_t>(periods_)) {
      throw ConfigError("federated trace does not match the dataset");
    }
  }

  out_.config = cfg_;
  out_.prosumers = prosumers_;
}

Engine::EvState& Engine::ev(const AgentId& id) {
  for (auto& e : evs_) {
    if (e.id == id) return e;
  }
  throw std::out_of_range("unknown EV " + id);
}

const Battery& Engine::battery(const AgentId& ev_id) const {
  for (const auto& e : evs_) {
    if (e.id == ev_id) return e.battery;
  }
  throw std::out_of_range("unknown EV " + ev_id);
}

void Engine::update_presence(Timestamp t) {
  for (std::size_t i = 0; i < evs_.size(); ++i) {
    EvState& e = evs_[i];
    const bool now = !e.forced_away && e.itinerary.present_at(t);
    if (e.present && !now) {
      handle_departure(e.id, t);
    } else if (!e.present && now) {
      if (e.departed_at) {
        // Trip consumption comes out of the reserve, never below the floor.
        const double drive = driving_energy_kwh(t.seconds - e.departed_at->seconds, cfg_.driving_kw);
        e.battery.soc_kwh = std::max(e.battery.floor_kwh(), e.battery.soc_kwh - drive);
        e.departed_at.reset();
      }
      e.present = true;
    }
    if (e.forced_away && !e.itinerary.present_at(t)) e.forced_away = false;
  }
}

void Engine::handle_departure(const AgentId& ev_id, Timestamp t) {
  EvState& e = ev(ev_id);
  if (!e.present) return;
  e.present = false;
  e.departed_at = t;
  // Leaving ahead of the itinerary: stay away until its scheduled departure.
  if (e.itinerary.present_at(t)) e.forced_away = true;
  const auto idx = static_cast<std::size_t>(&e - evs_.data());
  for (auto& m : match_of_) {
    if (m && m->first == idx) {
      m.reset();
      ++out_.checks.voided_matchings;
    }
  }
}

double Engine::prosumer_forecast(std::size_t prosumer, std::int64_t period) const {
  if (cfg_.forecaster == ForecasterKind::Federated) {
    return trace_->forecasts[static_cast<std::size_t>(period)][prosumer].net();
  }
  const PeriodTotals p = perfect_forecast(cfg_.dataset, prosumers_[prosumer], period, cfg_.matching_period_s);
  return p.production_kwh - p.consumption_kwh;
}

const std::vector<MatchAssignment>& Engine::begin_period(std::int64_t period) {
  if (period < 0 || period >= periods_ || period <= period_) {
    throw std::invalid_argument("period " + std::to_string(period) + " out of sequence");
  }
  period_ = period;
  ledger_.open_period(period);
  const Timestamp t0{period * cfg_.matching_period_s};
  const Timestamp t1{t0.seconds + cfg_.matching_period_s};

  if (period == 0 && trace_) {
    if (!ledger_.publish_params(sha256(encode_checkpoint(trace_->genesis)), 0)) {
      throw InvariantBreach("registry refused the genesis model");
    }
  }

  update_presence(t0);
  for (auto& m : match_of_) m.reset();
  assignments_.clear();

  // Submission times are drawn for every agent so presence never shifts
  // another agent's draw.
  Rng rng(derive_seed(cfg_.seeds.market, static_cast<std::uint64_t>(period)));
  const std::int64_t window_start = std::max<std::int64_t>(0, t0.seconds - cfg_.matching_period_s);
  auto draw = [&] {
    return Timestamp{window_start +
                     static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(steps_per_period_))) *
                         cfg_.data_resolution_s};
  };
  std::vector<Bid> prosumer_bids;
  for (std::size_t i = 0; i < prosumers_.size(); ++i) {
    prosumer_bids.push_back(Bid::prosumer(period, prosumers_[i], prosumer_forecast(i, period), draw()));
  }
  std::vector<std::optional<Bid>> ev_bids(evs_.size());
  for (std::size_t i = 0; i < evs_.size(); ++i) {
    const Timestamp at = draw();
    const EvState& e = evs_[i];
    if (e.present && !e.forced_away && e.itinerary.present_for(t0, t1)) {
      ev_bids[i] = Bid::ev(period, e.id, e.battery, at);
    }
  }

  for (const auto& b : prosumer_bids) {
    if (auto r = ledger_.submit_bid(b, b.agent_id); !r) {
      throw InvariantBreach("period " + std::to_string(period) + ": bid rejected: " + r.error);
    }
  }
  for (const auto& b : ev_bids) {
    if (!b) continue;
    if (auto r = ledger_.submit_bid(*b, b->agent_id); !r) {
      throw InvariantBreach("period " + std::to_string(period) + ": bid rejected: " + r.error);
    }
  }

  std::ostringstream dump;
  for (const Market& market : markets_) {
    std::vector<Bid> bids;
    for (std::size_t p : market.prosumers) bids.push_back(prosumer_bids[p]);
    for (std::size_t e : market.evs) {
      if (ev_bids[e]) bids.push_back(*ev_bids[e]);
    }
    const CostMatrix m = build_cost_matrix(bids, period);
    MatchAssignment hung = match_hungarian(m, period, market.name);
    MatchAssignment greedy = match_greedy(bids, period, market.name);
    PeriodCosts pc;
    pc.period = period;
    pc.market = market.name;
    pc.hungarian_cost_kwh = evaluate_assignment(m, hung);
    pc.greedy_cost_kwh = evaluate_assignment(m, greedy);
    MatchAssignment& chosen = cfg_.algorithm == MatchAlgorithm::Hungarian ? hung : greedy;
    pc.chosen_cost_kwh = cfg_.algorithm == MatchAlgorithm::Hungarian ? pc.hungarian_cost_kwh : pc.greedy_cost_kwh;
    out_.period_costs.push_back(pc);
    if (cfg_.dump_costs) m.write_csv_rows(dump, period, market.name);

    if (auto r = ledger_.record_assignment(chosen); !r) {
      throw InvariantBreach("period " + std::to_string(period) + ": assignment rejected: " + r.error);
    }
    for (const auto& pair : chosen.pairs) {
      const auto p = static_cast<std::size_t>(
          std::find(prosumers_.begin(), prosumers_.end(), pair.prosumer_id) - prosumers_.begin());
      std::size_t e = 0;
      while (evs_[e].id != pair.ev_id) ++e;
      match_of_[p] = std::make_pair(e, pair.matching_id);
    }
    assignments_.push_back(std::move(chosen));
  }
  out_.cost_dump += dump.str();

  if (cfg_.battery_fault_period && *cfg_.battery_fault_period == period && !evs_.empty()) {
    evs_.front().battery.soc_kwh = evs_.front().battery.ceiling_kwh() + 1.0;
  }
  return assignments_;
}

void Engine::log(const TradeEvent& e) {
  if (auto r = ledger_.log_trade(e); !r) {
    throw InvariantBreach(context(period_, e.t) + "trade rejected by ledger: " + r.error);
  }
  out_.trades.push_back(e);
}

void Engine::check_batteries(Timestamp t) {
  for (const auto& e : evs_) {
    if (auto err = validate_battery(e.battery, kEnergyTolerance)) {
      ++out_.checks.battery_violations;
      throw InvariantBreach(context(period_, t) + "EV " + e.id + ": " + *err);
    }
  }
}

std::vector<TradeEvent> Engine::execute_step(std::int64_t step_index) {
  if (period_ < 0 || step_index < 0 || step_index >= steps_per_period_) {
    throw std::invalid_argument("step outside the open period");
  }
  const Timestamp t{period_ * cfg_.matching_period_s + step_index * cfg_.data_resolution_s};
  const auto global_step = static_cast<std::size_t>(t.seconds / cfg_.data_resolution_s);
  update_presence(t);

  const double cap = cfg_.max_step_kwh.value_or(std::numeric_limits<double>::infinity());
  const Tariffs& tf = cfg_.tariffs;
  const std::size_t first_trade = out_.trades.size();

  for (std::size_t i = 0; i < prosumers_.size(); ++i) {
    const AgentId& pid = prosumers_[i];
    const double n = cfg_.dataset.records(pid)[global_step].net();
    if (n == 0.0) continue;
    const auto& match = match_of_[i];
    EvState* e = match ? &evs_[match->first] : nullptr;

    auto in_system = [&](Counterparty c, double q, double price) {
      TradeEvent ev;
      ev.t = t;
      ev.matching_id = match->second;
      ev.seller_id = c == Counterparty::ProsumerToEv ? pid : e->id;
      ev.buyer_id = c == Counterparty::ProsumerToEv ? e->id : pid;
      ev.energy_kwh = q;
      ev.price_p_per_kwh = price;
      ev.ev_available_kwh_after = e->battery.available_kwh();
      ev.ev_headroom_kwh_after = e->battery.headroom_kwh();
      ev.prosumer_id = pid;
      ev.ev_id = e->id;
      ev.counterparty = c;
      log(ev);
    };
    auto with_grid = [&](Counterparty c, double q, double price) {
      TradeEvent ev;
      ev.t = t;
      ev.matching_id = kGridMatchingId;
      ev.seller_id = c == Counterparty::ProsumerToGrid ? pid : AgentId(kGridMatchingId);
      ev.buyer_id = c == Counterparty::ProsumerToGrid ? AgentId(kGridMatchingId) : pid;
      ev.energy_kwh = q;
      ev.price_p_per_kwh = price;
      ev.prosumer_id = pid;
      ev.counterparty = c;
      log(ev);
    };

    double charged = 0.0, discharged = 0.0, exported = 0.0, imported = 0.0;
    if (n > 0.0) {
      if (e) {
        const double room = std::max(0.0, e->battery.headroom_kwh());
        charged = std::min({n, room, cap});
        if (charged > 0.0) {
          e->battery = update_cost_basis(e->battery, charged, split_price(tf));
          if (charged == room) e->battery.soc_kwh = e->battery.ceiling_kwh();
          in_system(Counterparty::ProsumerToEv, charged, split_price(tf));
        }
      }
      exported = n - charged;
      if (exported > 0.0) with_grid(Counterparty::ProsumerToGrid, exported, tf.p_gs);
    } else {
      const double need = -n;
      if (e && ledger_.has_charged(e->id)) {
        const double stock = std::max(0.0, e->battery.available_kwh());
        discharged = std::min({need, stock, cap});
        if (discharged > 0.0) {
          const double price = ev_resale_price(e->battery.cost_basis_p_per_kwh, tf);
          e->battery.soc_kwh -= discharged;
          if (discharged == stock) e->battery.soc_kwh = e->battery.floor_kwh();
          in_system(Counterparty::EvToProsumer, discharged, price);
        }
      }
      imported = need - discharged;
      if (imported > 0.0) with_grid(Counterparty::GridToProsumer, imported, tf.p_gb);
    }

    const double residual = std::abs(n - (charged - discharged + exported - imported));
    out_.checks.max_energy_residual_kwh = std::max(out_.checks.max_energy_residual_kwh, residual);
    if (residual > kEnergyTolerance) {
      throw InvariantBreach(context(period_, t) + "energy residual " + format_real(residual) + " kWh for " + pid);
    }
  }

  check_batteries(t);
  ++out_.checks.steps;
  return {out_.trades.begin() + static_cast<std::ptrdiff_t>(first_trade), out_.trades.end()};
}

void Engine::end_period() {
  if (trace_) {
    const auto& pubs = trace_->publishes;
    while (next_publish_ < pubs.size() && pubs[next_publish_].period == period_) {
      const PublishEvent& pe = pubs[next_publish_++];
      if (auto r = ledger_.publish_params(pe.params_hash, pe.version); !r) {
        throw InvariantBreach("period " + std::to_string(period_) + ": registry rejected v" +
                              std::to_string(pe.version) + ": " + r.error);
      }
    }
  }
  for (auto& m : match_of_) m.reset();
  ++out_.checks.periods;
}

RunArtifacts Engine::finish() && {
  ledger_.close_period();
  out_.anchors = ledger_.anchors();
  out_.payloads = ledger_.payloads();
  out_.ledger_head = ledger_.head();
  if (trace_) out_.federated = *trace_;
  return std::move(out_);
}

RunArtifacts run(const ScenarioConfig& cfg, std::shared_ptr<const FederatedTrace> trace) {
  Engine engine(cfg, std::move(trace));
  for (std::int64_t p = 0; p < engine.periods(); ++p) {
    engine.begin_period(p);
    for (std::int64_t s = 0; s < cfg.matching_period_s / cfg.data_resolution_s; ++s) {
      engine.execute_step(s);
    }
    engine.end_period();
  }
  return std::move(engine).finish();
}

}  // namespace v2g
