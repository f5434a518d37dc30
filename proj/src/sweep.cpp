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

#include "v2g/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace v2g {
namespace fs = std::filesystem;

namespace {

std::string label_for(std::size_t k) { return std::to_string(k) + "ev"; }

template <typename T>
bool has(const std::vector<T>& v, T x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

Json configured(const Json& base, const Json& scenario, MatchAlgorithm a, ForecasterKind f) {
  Json doc = base;
  doc["scenario"] = scenario;
  doc["algorithm"] = to_string(a);
  doc["forecaster"] = to_string(f);
  return doc;
}

}  // namespace

std::vector<std::pair<std::string, Json>> sweep_plan(const SweepOptions& opts) {
  if (opts.algorithms.empty() || opts.forecasters.empty()) throw ConfigError("sweep needs algorithms and forecasters");
  std::vector<std::pair<std::string, Json>> plan;
  if (opts.include_isolated) {
    const MatchAlgorithm a =
        has(opts.algorithms, MatchAlgorithm::Hungarian) ? MatchAlgorithm::Hungarian : opts.algorithms.front();
    const ForecasterKind f =
        has(opts.forecasters, ForecasterKind::Perfect) ? ForecasterKind::Perfect : opts.forecasters.front();
    plan.emplace_back(std::string("isolated_") + to_string(a) + "_" + to_string(f),
                      configured(opts.base, Json{{"kind", "isolated"}}, a, f));
  }
  for (std::size_t k : opts.evs) {
    for (MatchAlgorithm a : opts.algorithms) {
      for (ForecasterKind f : opts.forecasters) {
        plan.emplace_back(label_for(k) + "_" + to_string(a) + "_" + to_string(f),
                          configured(opts.base, Json{{"kind", "shared"}, {"evs", k}}, a, f));
      }
    }
  }
  return plan;
}

RunReport simulate_to_dir(const Json& scenario, const fs::path& base_dir, const fs::path& dir,
                          std::shared_ptr<const FederatedTrace> trace) {
  const ScenarioConfig cfg = build_scenario(scenario, base_dir);
  const RunArtifacts run_out = run(cfg, std::move(trace));
  RunReport report = report_of(run_out);
  write_run_dir(dir, run_out, report, resolve_paths(scenario, base_dir));
  return report;
}

std::vector<SweepRun> run_sweep(const SweepOptions& opts, const fs::path& out_dir, std::ostream& log) {
  const auto plan = sweep_plan(opts);
  fs::create_directories(out_dir);
  std::map<std::string, std::shared_ptr<const FederatedTrace>> traces;
  std::vector<SweepRun> runs;

  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& [name, doc] = plan[i];
    const auto started = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = build_scenario(doc, fs::current_path());
    std::shared_ptr<const FederatedTrace> trace;
    if (cfg.forecaster == ForecasterKind::Federated) {
      auto& slot = traces[cfg.scenario_label()];
      if (!slot) slot = std::make_shared<const FederatedTrace>(federated_trace_for(cfg));
      trace = slot;
    }
    const RunArtifacts out = run(cfg, trace);
    SweepRun r{name, doc, identity_of(cfg), report_of(out)};
    write_run_dir(out_dir / name, out, r.report, doc);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    char line[256];
    std::snprintf(line, sizeof line, "[sweep] %zu/%zu %s: in-system %.3f kWh (%.1f s)\n", i + 1, plan.size(),
                  name.c_str(), r.report.total_in_system_kwh(), secs);
    log << line << std::flush;
    runs.push_back(std::move(r));
  }

  auto find = [&](const std::string& scenario, MatchAlgorithm a, ForecasterKind f) -> const SweepRun* {
    for (const auto& r : runs) {
      if (r.identity.scenario == scenario && r.identity.algorithm == to_string(a) &&
          r.identity.forecaster == to_string(f)) {
        return &r;
      }
    }
    return nullptr;
  };
  auto rows_of = [](const SweepRun& r) { return r.report.rows(); };

  std::ostringstream cmp;
  cmp << kComparisonHeader << '\n';
  for (std::size_t k : opts.evs) {
    for (ForecasterKind f : opts.forecasters) {
      const SweepRun* a = find(label_for(k), MatchAlgorithm::Greedy, f);
      const SweepRun* b = find(label_for(k), MatchAlgorithm::Hungarian, f);
      if (!a || !b) continue;
      write_comparison_rows(cmp, "algorithm", label_for(k), std::string("greedy/") + to_string(f),
                            std::string("hungarian/") + to_string(f),
                            compare_runs(a->identity, rows_of(*a), b->identity, rows_of(*b)));
    }
  }
  for (std::size_t k : opts.evs) {
    for (MatchAlgorithm alg : opts.algorithms) {
      const SweepRun* a = find(label_for(k), alg, ForecasterKind::Perfect);
      const SweepRun* b = find(label_for(k), alg, ForecasterKind::Federated);
      if (!a || !b) continue;
      write_comparison_rows(cmp, "forecaster", label_for(k), std::string(to_string(alg)) + "/perfect",
                            std::string(to_string(alg)) + "/federated",
                            compare_runs(a->identity, rows_of(*a), b->identity, rows_of(*b)));
    }
  }
  const SweepRun* iso = nullptr;
  for (const auto& r : runs) {
    if (r.identity.scenario == "isolated") iso = &r;
  }
  std::vector<const SweepRun*> chart_runs;
  if (iso) chart_runs.push_back(iso);
  for (std::size_t k : opts.evs) {
    const SweepRun* b = iso ? find(label_for(k), parse_algorithm(iso->identity.algorithm),
                                   parse_forecaster(iso->identity.forecaster))
                            : find(label_for(k), opts.algorithms.front(), opts.forecasters.front());
    if (!b) continue;
    chart_runs.push_back(b);
    if (iso) {
      const std::string combo = iso->identity.algorithm + "/" + iso->identity.forecaster;
      write_comparison_rows(cmp, "fleet", label_for(k), "isolated/" + combo, label_for(k) + "/" + combo,
                            compare_runs(iso->identity, rows_of(*iso), b->identity, rows_of(*b)));
    }
  }
  write_file(out_dir / "comparison.csv", cmp.str());

  std::ostringstream summary;
  summary << "run,scenario,algorithm,forecaster,in_system_kwh,scenario_grid_kwh,min_in_system_price_p_per_kwh,"
             "max_in_system_price_p_per_kwh,min_ev_money_benefit_p,money_residual_p,"
             "benefit_identity_residual_kwh\n";
  for (const auto& r : runs) {
    double grid = 0.0;
    for (const auto& p : r.report.prosumers) grid += p.scenario_grid_kwh;
    double min_ev = 0.0;
    for (std::size_t i = 0; i < r.report.evs.size(); ++i) {
      min_ev = i == 0 ? r.report.evs[i].money_benefit_p : std::min(min_ev, r.report.evs[i].money_benefit_p);
    }
    summary << r.name << ',' << r.identity.scenario << ',' << r.identity.algorithm << ',' << r.identity.forecaster
            << ',' << format_fixed(r.report.total_in_system_kwh(), 6) << ',' << format_fixed(grid, 6) << ','
            << (r.report.min_in_system_price ? format_real(*r.report.min_in_system_price) : "") << ','
            << (r.report.max_in_system_price ? format_real(*r.report.max_in_system_price) : "") << ','
            << format_fixed(min_ev, 4) << ',' << format_real(r.report.money_residual_p) << ','
            << format_real(r.report.benefit_identity_residual_kwh) << '\n';
  }
  write_file(out_dir / "sweep_summary.csv", summary.str());

  if (!chart_runs.empty()) {
    BarChart energy, money;
    energy.title = "In-system traded energy per prosumer";
    energy.y_label = "kWh";
    money.title = "Monetary benefit per agent";
    money.y_label = "pence";
    for (const auto& p : chart_runs.front()->report.prosumers) {
      energy.groups.push_back(p.agent_id);
      money.groups.push_back(p.agent_id);
    }
    money.groups.emplace_back("EV avg");
    for (const SweepRun* r : chart_runs) {
      const std::string series = r->identity.scenario == "isolated" ? "Isolated" : r->identity.scenario;
      energy.series.push_back(series);
      money.series.push_back(series);
      std::vector<double> e, m;
      for (const auto& p : r->report.prosumers) {
        e.push_back(p.in_system_kwh);
        m.push_back(p.money_benefit_p);
      }
      m.push_back(r->report.ev_average.money_benefit_p);
      energy.values.push_back(std::move(e));
      money.values.push_back(std::move(m));
    }
    write_file(out_dir / "energy_by_scenario.svg", render_svg(energy));
    write_file(out_dir / "money_by_scenario.svg", render_svg(money));
  }
  return runs;
}

}  // namespace v2g
