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

#include "v2g/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "v2g/csv.hpp"

namespace v2g {

const char* to_string(ReportRole r) {
  switch (r) {
    case ReportRole::Prosumer:
      return "prosumer";
    case ReportRole::Ev:
      return "ev";
    case ReportRole::EvAverage:
      return "ev_average";
  }
  return "?";
}

namespace {

ReportRole parse_role(const std::string& s) {
  for (auto r : {ReportRole::Prosumer, ReportRole::Ev, ReportRole::EvAverage}) {
    if (s == to_string(r)) return r;
  }
  throw ConfigError("unknown report role '" + s + "'");
}

}  // namespace

double baseline_grid_exchange(const LoadDataset& ds, const AgentId& agent) {
  double total = 0.0;
  for (const auto& r : ds.records(agent)) total += std::abs(r.net());
  return total;
}

double baseline_grid_cost(const LoadDataset& ds, const AgentId& agent, const Tariffs& tariffs) {
  double cost = 0.0;
  for (const auto& r : ds.records(agent)) {
    const double n = r.net();
    cost += n < 0.0 ? -n * tariffs.p_gb : -n * tariffs.p_gs;
  }
  return cost;
}

double absolute_benefit(double original_kwh, double scenario_kwh) { return original_kwh - scenario_kwh; }

double RunReport::total_in_system_kwh() const {
  double total = 0.0;
  for (const auto& p : prosumers) total += p.in_system_kwh;
  return total;
}

std::vector<AgentReport> RunReport::rows() const {
  std::vector<AgentReport> out = prosumers;
  out.insert(out.end(), evs.begin(), evs.end());
  out.push_back(ev_average);
  return out;
}

RunReport build_run_report(const LoadDataset& ds, const std::vector<AgentId>& prosumers,
                           const std::map<AgentId, double>& initial_basis, const Tariffs& tariffs,
                           std::span<const TradeEvent> trades) {
  std::map<AgentId, AgentReport> rows;
  std::map<AgentId, double> cash;
  std::map<AgentId, double> basis = initial_basis;
  RunReport report;

  for (const auto& id : prosumers) {
    AgentReport& r = rows[id];
    r.agent_id = id;
    r.role = ReportRole::Prosumer;
    r.original_grid_kwh = baseline_grid_exchange(ds, id);
  }
  for (const auto& [id, _] : initial_basis) {
    AgentReport& r = rows[id];
    r.agent_id = id;
    r.role = ReportRole::Ev;
  }

  for (const auto& t : trades) {
    const double value = t.energy_kwh * t.price_p_per_kwh;
    cash[t.seller_id] += value;
    cash[t.buyer_id] -= value;
    auto prow = rows.find(t.prosumer_id);
    if (prow == rows.end()) throw std::invalid_argument("trade names unknown prosumer " + t.prosumer_id);
    if (!t.in_system()) {
      prow->second.scenario_grid_kwh += t.energy_kwh;
      continue;
    }
    auto erow = rows.find(t.ev_id);
    if (erow == rows.end() || erow->second.role != ReportRole::Ev) {
      throw std::invalid_argument("trade names unknown EV " + t.ev_id);
    }
    prow->second.in_system_kwh += t.energy_kwh;
    erow->second.in_system_kwh += t.energy_kwh;
    if (!report.min_in_system_price || t.price_p_per_kwh < *report.min_in_system_price) {
      report.min_in_system_price = t.price_p_per_kwh;
    }
    if (!report.max_in_system_price || t.price_p_per_kwh > *report.max_in_system_price) {
      report.max_in_system_price = t.price_p_per_kwh;
    }
    double& b = basis[t.ev_id];
    if (t.counterparty == Counterparty::ProsumerToEv) {
      const double held = std::max(0.0, t.ev_available_kwh_after - t.energy_kwh);
      b = (b * held + t.price_p_per_kwh * t.energy_kwh) / (held + t.energy_kwh);
    } else {
      erow->second.money_benefit_p += (t.price_p_per_kwh - b) * t.energy_kwh;
    }
  }

  double cash_total = 0.0;
  for (const auto& [_, v] : cash) cash_total += v;
  report.money_residual_p = std::abs(cash_total);

  for (auto& [id, r] : rows) {
    r.cash_flow_p = cash.count(id) ? cash.at(id) : 0.0;
    if (r.role == ReportRole::Prosumer) {
      r.absolute_benefit_kwh = absolute_benefit(r.original_grid_kwh, r.scenario_grid_kwh);
      r.money_benefit_p = baseline_grid_cost(ds, id, tariffs) + r.cash_flow_p;
      report.benefit_identity_residual_kwh =
          std::max(report.benefit_identity_residual_kwh,
                   std::abs(r.original_grid_kwh - r.scenario_grid_kwh - r.in_system_kwh));
    }
  }
  for (const auto& id : prosumers) report.prosumers.push_back(rows.at(id));
  for (const auto& [id, _] : initial_basis) report.evs.push_back(rows.at(id));

  AgentReport& avg = report.ev_average;
  avg.agent_id = "EV_AVG";
  avg.role = ReportRole::EvAverage;
  if (!report.evs.empty()) {
    const auto n = static_cast<double>(report.evs.size());
    for (const auto& e : report.evs) {
      avg.in_system_kwh += e.in_system_kwh;
      avg.money_benefit_p += e.money_benefit_p;
      avg.cash_flow_p += e.cash_flow_p;
    }
    avg.in_system_kwh /= n;
    avg.money_benefit_p /= n;
    avg.cash_flow_p /= n;
  }
  return report;
}

double monetary_benefit(const RunReport& report, const AgentId& agent) {
  for (const auto& r : report.prosumers) {
    if (r.agent_id == agent) return r.money_benefit_p;
  }
  for (const auto& r : report.evs) {
    if (r.agent_id == agent) return r.money_benefit_p;
  }
  if (agent == report.ev_average.agent_id) return report.ev_average.money_benefit_p;
  throw std::out_of_range("no report row for " + agent);
}

void write_report_csv(const RunReport& report, std::ostream& out) {
  out << kReportHeader << '\n';
  for (const auto& r : report.rows()) {
    out << r.agent_id << ',' << to_string(r.role) << ',' << format_fixed(r.original_grid_kwh, 6) << ','
        << format_fixed(r.scenario_grid_kwh, 6) << ',' << format_fixed(r.absolute_benefit_kwh, 6) << ','
        << format_fixed(r.in_system_kwh, 6) << ',' << format_fixed(r.money_benefit_p, 4) << ','
        << format_fixed(r.cash_flow_p, 4) << '\n';
  }
}

std::vector<AgentReport> read_report_csv(std::istream& in) {
  CsvReader reader(in, CsvReader::split(kReportHeader));
  std::vector<AgentReport> out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    AgentReport r;
    r.agent_id = row[0];
    r.role = parse_role(row[1]);
    r.original_grid_kwh = parse_real(row[2]);
    r.scenario_grid_kwh = parse_real(row[3]);
    r.absolute_benefit_kwh = parse_real(row[4]);
    r.in_system_kwh = parse_real(row[5]);
    r.money_benefit_p = parse_real(row[6]);
    r.cash_flow_p = parse_real(row[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> percent_change(double a, double b) {
  if (a == 0.0) return b == 0.0 ? std::optional<double>(0.0) : std::nullopt;
  return (b - a) / a * 100.0;
}

Comparison compare_runs(const RunIdentity& a_id, const std::vector<AgentReport>& a, const RunIdentity& b_id,
                        const std::vector<AgentReport>& b) {
  auto require_same = [](const std::string& x, const std::string& y, const char* what) {
    if (x != y) throw std::invalid_argument(std::string("runs use different ") + what);
  };
  require_same(a_id.dataset_digest, b_id.dataset_digest, "datasets");
  require_same(a_id.fleet_digest, b_id.fleet_digest, "fleets");
  require_same(a_id.seeds, b_id.seeds, "seeds");
  require_same(a_id.tariffs, b_id.tariffs, "tariffs");

  std::vector<std::string> differing;
  if (a_id.scenario != b_id.scenario) differing.emplace_back("scenario");
  if (a_id.algorithm != b_id.algorithm) differing.emplace_back("algorithm");
  if (a_id.forecaster != b_id.forecaster) differing.emplace_back("forecaster");
  if (differing.size() > 1) {
    std::string list;
    for (const auto& d : differing) list += (list.empty() ? "" : ", ") + d;
    throw std::invalid_argument("runs differ in more than one factor: " + list);
  }

  auto prosumer_rows = [](const std::vector<AgentReport>& rows) {
    std::map<AgentId, double> m;
    for (const auto& r : rows) {
      if (r.role == ReportRole::Prosumer) m[r.agent_id] = r.in_system_kwh;
    }
    return m;
  };
  const auto pa = prosumer_rows(a);
  const auto pb = prosumer_rows(b);
  if (pa.size() != pb.size() || !std::equal(pa.begin(), pa.end(), pb.begin(),
                                            [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw std::invalid_argument("runs have different prosumers");
  }

  Comparison c;
  c.factor = differing.empty() ? "none" : differing.front();
  double ta = 0.0, tb = 0.0;
  for (const auto& [id, va] : pa) {
    const double vb = pb.at(id);
    c.rows.push_back({id, va, vb, percent_change(va, vb)});
    ta += va;
    tb += vb;
  }
  c.rows.push_back({"AGGREGATE", ta, tb, percent_change(ta, tb)});
  return c;
}

void write_comparison_rows(std::ostream& out, const std::string& table, const std::string& scenario,
                           const std::string& a_label, const std::string& b_label, const Comparison& c) {
  for (const auto& r : c.rows) {
    out << table << ',' << scenario << ',' << r.agent_id << ",in_system_kwh," << a_label << ',' << b_label << ','
        << format_fixed(r.a_kwh, 6) << ',' << format_fixed(r.b_kwh, 6) << ','
        << (r.pct_change ? format_fixed(*r.pct_change, 4) : std::string()) << '\n';
  }
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

}  // namespace

std::string render_svg(const BarChart& chart) {
  if (chart.values.size() != chart.series.size()) throw std::invalid_argument("one value row per series");
  for (const auto& row : chart.values) {
    if (row.size() != chart.groups.size()) throw std::invalid_argument("one value per group");
  }
  const double width = 960, height = 480, left = 80, right = 170, top = 50, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  double lo = 0.0, hi = 0.0;
  for (const auto& row : chart.values) {
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi == lo) hi = lo + 1.0;
  const double span = hi - lo;
  auto y_of = [&](double v) { return top + (hi - v) / span * plot_h; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(width / 2) << "\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">"
    << escape(chart.title) << "</text>\n";
  s << "<text transform=\"translate(20," << num(top + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(chart.y_label) << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double v = lo + span * i / 5.0;
    const double y = y_of(v);
    s << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + plot_w) << "\" y2=\""
      << num(y) << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << num(v)
      << "</text>\n";
  }
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(y_of(0)) << "\" x2=\"" << num(left + plot_w) << "\" y2=\""
    << num(y_of(0)) << "\" stroke=\"black\"/>\n";

  const std::size_t ng = std::max<std::size_t>(1, chart.groups.size());
  const std::size_t ns = std::max<std::size_t>(1, chart.series.size());
  const double group_w = plot_w / static_cast<double>(ng);
  const double bar_w = group_w * 0.8 / static_cast<double>(ns);
  for (std::size_t g = 0; g < chart.groups.size(); ++g) {
    const double gx = left + group_w * static_cast<double>(g);
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
      const double v = chart.values[k][g];
      const double y0 = y_of(std::max(v, 0.0)), y1 = y_of(std::min(v, 0.0));
      s << "<rect x=\"" << num(gx + group_w * 0.1 + bar_w * static_cast<double>(k)) << "\" y=\"" << num(y0)
        << "\" width=\"" << num(bar_w) << "\" height=\"" << num(y1 - y0) << "\" fill=\""
        << kPalette[k % std::size(kPalette)] << "\"><title>" << escape(chart.series[k]) << " / "
        << escape(chart.groups[g]) << ": " << num(v) << "</title></rect>\n";
    }
    s << "<text x=\"" << num(gx + group_w / 2) << "\" y=\"" << num(top + plot_h + 20)
      << "\" text-anchor=\"middle\">" << escape(chart.groups[g]) << "</text>\n";
  }
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const double y = top + 20.0 * static_cast<double>(k);
    s << "<rect x=\"" << num(width - right + 20) << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\""
      << kPalette[k % std::size(kPalette)] << "\"/>\n";
    s << "<text x=\"" << num(width - right + 38) << "\" y=\"" << num(y + 10) << "\">" << escape(chart.series[k])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace v2g
