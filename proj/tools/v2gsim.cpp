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

// v2gsim: data generation, simulation, sweeps, comparison, ledger
// verification and reporting. Logs go to stderr; artifacts go to files.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "v2g/artifacts.hpp"
#include "v2g/sweep.hpp"

namespace fs = std::filesystem;
using namespace v2g;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitVerify = 3;
constexpr const char* kOutEnv = "V2GSIM_OUT";

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  throw ConfigError(std::string("--out not given and ") + kOutEnv + " is unset");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_evs(const std::string& s) {
  std::vector<std::size_t> out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const std::int64_t lo = parse_int(s.substr(0, dots));
    const std::int64_t hi = parse_int(s.substr(dots + 2));
    if (lo < 1 || hi < lo) throw ConfigError("--evs range must be 1..k with k >= 1");
    for (std::int64_t k = lo; k <= hi; ++k) out.push_back(static_cast<std::size_t>(k));
    return out;
  }
  for (const auto& item : split_list(s)) {
    const std::int64_t k = parse_int(item);
    if (k < 1) throw ConfigError("--evs entries must be positive");
    out.push_back(static_cast<std::size_t>(k));
  }
  if (out.empty()) throw ConfigError("--evs is empty");
  return out;
}

Json load_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
  Json doc = resolve_paths(read_scenario_file(path), fs::absolute(path).parent_path());
  if (seed) doc = with_seed(std::move(doc), *seed);
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy trading simulator for PV prosumers and electric vehicles"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate-data", "Write the reference dataset, fleet and scenario file");
  std::string gen_out;
  std::int64_t gen_horizon = 86400;
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--horizon-s", gen_horizon, "Horizon in seconds")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Run one scenario");
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  bool dump_costs = false;
  sim->add_option("--config", sim_config, "Scenario file")->required();
  sim->add_option("--out", sim_out, "Run directory");
  sim->add_option("--seed", sim_seed, "Override market and model seeds");
  sim->add_flag("--dump-costs", dump_costs, "Also write every period's cost matrix to costs.csv");

  auto* sweep = app.add_subcommand("sweep", "Run the scenario grid");
  std::string sw_config, sw_out, sw_evs = "1..5", sw_algos = "greedy,hungarian", sw_fc = "perfect,federated";
  std::optional<std::uint64_t> sw_seed;
  sweep->add_option("--config", sw_config, "Base scenario file")->required();
  sweep->add_option("--out", sw_out, "Output directory");
  sweep->add_option("--evs", sw_evs, "Fleet sizes: range 1..5 or list 1,3");
  sweep->add_option("--algos", sw_algos, "Matching algorithms");
  sweep->add_option("--forecast", sw_fc, "Forecasters");
  sweep->add_option("--seed", sw_seed, "Override market and model seeds");

  auto* cmp = app.add_subcommand("compare", "Compare two run directories");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("--a", cmp_a, "Baseline run directory")->required();
  cmp->add_option("--b", cmp_b, "Compared run directory")->required();
  cmp->add_option("--out", cmp_out, "comparison CSV file")->required();

  auto* ver = app.add_subcommand("verify-ledger", "Verify a run's hash chain and trade log");
  std::string ver_run;
  ver->add_option("--run", ver_run, "Run directory")->required();

  auto* rep = app.add_subcommand("report", "Recompute report.csv from a run directory");
  std::string rep_run, rep_out;
  rep->add_option("--run", rep_run, "Run directory")->required();
  rep->add_option("--out", rep_out, "Report file (default: <run>/report.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const fs::path dir = output_dir(gen_out);
      fs::create_directories(dir);
      write_load_csv(generate_dataset(reference_agents(), gen_horizon), dir / "load.csv");
      write_itineraries_csv(reference_fleet(gen_horizon), dir / "itineraries.csv");
      Json doc = reference_scenario();
      doc["dataset"] = {{"path", "load.csv"}};
      doc["fleet"] = {{"path", "itineraries.csv"}};
      write_file(dir / "scenario.json", doc.dump(2) + "\n");
      std::cerr << "wrote load.csv, itineraries.csv, scenario.json to " << dir.string() << '\n';
    } else if (*sim) {
      const Json doc = load_config(sim_config, sim_seed);
      const fs::path dir = output_dir(sim_out);
      ScenarioConfig cfg = build_scenario(doc, fs::current_path());
      cfg.dump_costs = dump_costs;
      const RunArtifacts out = run(cfg);
      const RunReport report = report_of(out);
      write_run_dir(dir, out, report, doc);
      std::cerr << "simulated " << cfg.name << " (" << cfg.scenario_label() << ", " << to_string(cfg.algorithm)
                << ", " << to_string(cfg.forecaster) << "): " << out.trades.size() << " trades, in-system "
                << format_fixed(report.total_in_system_kwh(), 3) << " kWh -> " << dir.string() << '\n';
    } else if (*sweep) {
      SweepOptions opts;
      opts.base = load_config(sw_config, sw_seed);
      opts.evs = parse_evs(sw_evs);
      opts.algorithms.clear();
      for (const auto& a : split_list(sw_algos)) opts.algorithms.push_back(parse_algorithm(a));
      opts.forecasters.clear();
      for (const auto& f : split_list(sw_fc)) opts.forecasters.push_back(parse_forecaster(f));
      const auto runs = run_sweep(opts, output_dir(sw_out), std::cerr);
      std::cerr << "sweep finished: " << runs.size() << " runs\n";
    } else if (*cmp) {
      auto load = [](const std::string& dir) {
        const Json m = read_manifest(dir);
        std::istringstream in(read_file(fs::path(dir) / "report.csv"));
        return std::make_pair(identity_from_json(m.at("identity")), read_report_csv(in));
      };
      const auto [ida, ra] = load(cmp_a);
      const auto [idb, rb] = load(cmp_b);
      Comparison c;
      try {
        c = compare_runs(ida, ra, idb, rb);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      std::ostringstream out;
      out << kComparisonHeader << '\n';
      write_comparison_rows(out, c.factor, idb.scenario,
                            ida.scenario + "/" + ida.algorithm + "/" + ida.forecaster,
                            idb.scenario + "/" + idb.algorithm + "/" + idb.forecaster, c);
      write_file(cmp_out, out.str());
      std::cerr << "compared runs differing in: " << c.factor << '\n';
    } else if (*ver) {
      const RunCheck check = verify_run_dir(ver_run);
      if (!check.ok) {
        std::cerr << "ledger verification FAILED: " << check.message << '\n';
        if (check.first_broken_anchor) std::cerr << "first broken anchor: " << *check.first_broken_anchor << '\n';
        return kExitVerify;
      }
      std::cerr << "ledger verified: chain intact, exchange.csv complete, digests match\n";
    } else if (*rep) {
      const RunReport report = rebuild_report(rep_run);
      std::ostringstream out;
      write_report_csv(report, out);
      write_file(rep_out.empty() ? fs::path(rep_run) / "report.csv" : fs::path(rep_out), out.str());
    }
  } catch (const InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
