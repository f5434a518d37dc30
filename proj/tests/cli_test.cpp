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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("v2gsim_cli_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    ASSERT_EQ(run("generate-data --out " + (root_ / "data").string() + " --horizon-s 3600").code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static Outcome run(const std::string& args) {
    const fs::path err = root_ / "stderr.txt";
    const std::string cmd = std::string(V2GSIM_BIN) + " " + args + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err);
    o.err.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return o;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  static void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
  }

  static nlohmann::json scenario() { return nlohmann::json::parse(slurp(root_ / "data" / "scenario.json")); }

  static fs::path write_scenario(const std::string& name, const nlohmann::json& doc) {
    const fs::path p = root_ / "data" / (name + ".json");
    spit(p, doc.dump(2));
    return p;
  }

  static fs::path simulate(const std::string& name) {
    const fs::path out = root_ / name;
    const Outcome o = run("simulate --config " + (root_ / "data" / "scenario.json").string() + " --out " + out.string());
    EXPECT_EQ(o.code, 0) << o.err;
    return out;
  }

  static inline fs::path root_;
};

TEST_F(Cli, SimulateWritesRunDirectory) {
  const fs::path out = simulate("run_ok");
  for (const char* f : {"exchange.csv", "anchors.csv", "payloads.bin", "report.csv", "period_costs.csv",
                        "manifest.json", "run_summary.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(slurp(out / "exchange.csv").rfind("t_s,energy_kwh,ev_available_kwh,ev_capacity_kwh,matching_id", 0), 0u);
  EXPECT_EQ(run("verify-ledger --run " + out.string()).code, 0);
}

TEST_F(Cli, SimulateIsDeterministic) {
  const fs::path a = simulate("det_a");
  const fs::path b = simulate("det_b");
  EXPECT_EQ(slurp(a / "exchange.csv"), slurp(b / "exchange.csv"));
  EXPECT_EQ(slurp(a / "report.csv"), slurp(b / "report.csv"));
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const fs::path out = root_ / "env_run";
  ::unsetenv("V2GSIM_OUT");
  const Outcome o = run("simulate --config " + (root_ / "data" / "scenario.json").string());
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("V2GSIM_OUT"), std::string::npos) << o.err;
  ::setenv("V2GSIM_OUT", out.string().c_str(), 1);
  const Outcome ok = run("simulate --config " + (root_ / "data" / "scenario.json").string());
  ::unsetenv("V2GSIM_OUT");
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(fs::exists(out / "exchange.csv"));
}

TEST_F(Cli, MissingDatasetIsConfigError) {
  auto doc = scenario();
  doc["dataset"] = {{"path", "does_not_exist.csv"}};
  const Outcome o = run("simulate --config " + write_scenario("missing", doc).string() + " --out " +
                        (root_ / "missing_run").string());
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("dataset.path"), std::string::npos) << o.err;
}

TEST_F(Cli, MissingRequiredFieldNamed) {
  auto doc = scenario();
  doc.erase("dataset");
  const Outcome o = run("simulate --config " + write_scenario("nodata", doc).string() + " --out " +
                        (root_ / "nodata_run").string());
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("missing field 'dataset'"), std::string::npos) << o.err;
}

TEST_F(Cli, UnknownFlagIsUsageError) { EXPECT_EQ(run("simulate --bogus").code, 1); }

TEST_F(Cli, BatteryFaultExitsWithInvariantCode) {
  auto doc = scenario();
  doc["fault_injection"] = {{"battery_fault_period", 3}};
  const Outcome o = run("simulate --config " + write_scenario("fault", doc).string() + " --out " +
                        (root_ / "fault_run").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("period 3"), std::string::npos) << o.err;
}

TEST_F(Cli, EditedExchangeFailsVerification) {
  const fs::path out = simulate("tamper_exchange");
  std::string csv = slurp(out / "exchange.csv");
  const auto line = csv.find('\n', csv.find('\n') + 1);
  csv.erase(csv.find('\n') + 1, line - csv.find('\n'));
  spit(out / "exchange.csv", csv);
  EXPECT_EQ(run("verify-ledger --run " + out.string()).code, 3);
}

TEST_F(Cli, EditedAnchorsFailVerification) {
  const fs::path out = simulate("tamper_anchors");
  std::string csv = slurp(out / "anchors.csv");
  // Flip one hex digit of the second anchor's state hash.
  const auto row = csv.find('\n', csv.find('\n') + 1) + 1;
  std::size_t field = row;
  for (int i = 0; i < 4; ++i) field = csv.find(',', field) + 1;
  csv[field] = csv[field] == '0' ? '1' : '0';
  spit(out / "anchors.csv", csv);
  const Outcome o = run("verify-ledger --run " + out.string());
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.err.find("first broken anchor"), std::string::npos) << o.err;
}

TEST_F(Cli, ReportRebuildsIdenticalFile) {
  const fs::path out = simulate("report_run");
  const Outcome o = run("report --run " + out.string() + " --out " + (root_ / "rebuilt.csv").string());
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(slurp(root_ / "rebuilt.csv"), slurp(out / "report.csv"));
}

TEST_F(Cli, SweepOneEvAndCompare) {
  const fs::path out = root_ / "sweep";
  const Outcome o = run("sweep --config " + (root_ / "data" / "scenario.json").string() + " --evs 1 --out " + out.string());
  ASSERT_EQ(o.code, 0) << o.err;
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(out)) runs += fs::exists(e.path() / "manifest.json") ? 1 : 0;
  EXPECT_EQ(runs, 5u);
  for (const char* f : {"comparison.csv", "sweep_summary.csv", "energy_by_scenario.svg", "money_by_scenario.svg"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const Outcome cmp = run("compare --a " + (out / "1ev_greedy_perfect").string() + " --b " +
                          (out / "1ev_hungarian_perfect").string() + " --out " + (root_ / "cmp.csv").string());
  EXPECT_EQ(cmp.code, 0) << cmp.err;
  EXPECT_NE(slurp(root_ / "cmp.csv").find("AGGREGATE"), std::string::npos);
  const Outcome bad = run("compare --a " + (out / "1ev_greedy_perfect").string() + " --b " +
                          (out / "1ev_hungarian_federated").string() + " --out " + (root_ / "cmp2.csv").string());
  EXPECT_EQ(bad.code, 1);
}

}  // namespace
