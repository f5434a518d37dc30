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

#include "v2g/ledger.hpp"

#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>

#include "v2g/csv.hpp"

namespace v2g {

namespace {

constexpr std::uint8_t kBidEntry = 0;
constexpr std::uint8_t kAssignmentEntry = 1;

void encode_trade(ByteWriter& w, const TradeEvent& e) {
  w.i64(e.t.seconds);
  w.str(e.matching_id);
  w.str(e.seller_id);
  w.str(e.buyer_id);
  w.f64(e.energy_kwh);
  w.f64(e.price_p_per_kwh);
  w.f64(e.ev_available_kwh_after);
  w.f64(e.ev_headroom_kwh_after);
  w.str(e.prosumer_id);
  w.str(e.ev_id);
  w.u8(static_cast<std::uint8_t>(e.counterparty));
}

TradeEvent decode_trade(ByteReader& r) {
  TradeEvent e;
  e.t = Timestamp{r.i64()};
  e.matching_id = r.str();
  e.seller_id = r.str();
  e.buyer_id = r.str();
  e.energy_kwh = r.f64();
  e.price_p_per_kwh = r.f64();
  e.ev_available_kwh_after = r.f64();
  e.ev_headroom_kwh_after = r.f64();
  e.prosumer_id = r.str();
  e.ev_id = r.str();
  const std::uint8_t cp = r.u8();
  if (cp > 3) throw std::invalid_argument("bad counterparty code");
  e.counterparty = static_cast<Counterparty>(cp);
  return e;
}

struct PayloadHeader {
  std::uint8_t contract = 0;
  std::int64_t period = 0;
  std::uint64_t sequence = 0;
  std::uint32_t count = 0;
};

PayloadHeader read_header(ByteReader& r) {
  PayloadHeader h;
  h.contract = r.u8();
  h.period = r.i64();
  h.sequence = r.u64();
  h.count = r.u32();
  return h;
}

}  // namespace

const char* to_string(ContractKind k) {
  switch (k) {
    case ContractKind::Matching: return "matching";
    case ContractKind::Management: return "management";
    case ContractKind::LstmRegistry: return "lstm";
  }
  return "?";
}

ContractKind parse_contract_kind(const std::string& s) {
  for (auto k : {ContractKind::Matching, ContractKind::Management, ContractKind::LstmRegistry}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown contract '" + s + "'");
}

void Allowlist::add(const AgentId& id, AgentRole role) {
  if (!roles_.emplace(id, role).second) throw ConfigError("duplicate allowlist id '" + id + "'");
}

std::optional<AgentRole> Allowlist::role_of(const AgentId& id) const {
  auto it = roles_.find(id);
  if (it == roles_.end()) return std::nullopt;
  return it->second;
}

std::string AnchorRecord::encode() const {
  ByteWriter w;
  w.u64(anchor_index);
  w.u8(static_cast<std::uint8_t>(contract));
  w.u64(sequence);
  w.i64(period);
  w.digest(state_hash);
  w.digest(prev_anchor_hash);
  return w.take();
}

Ledger::Ledger(Allowlist allowlist) : allowlist_(std::move(allowlist)) {}

Digest Ledger::head() const { return anchors_.empty() ? Digest{} : anchors_.back().digest(); }

void Ledger::anchor(ContractKind kind, Pending& p) {
  if (p.count == 0) return;
  const auto k = static_cast<std::size_t>(kind);
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(kind));
  w.i64(period_);
  w.u64(next_sequence_[k]);
  w.u32(p.count);
  w.raw(p.body.bytes());
  std::string payload = w.take();

  AnchorRecord a;
  a.anchor_index = anchors_.size();
  a.contract = kind;
  a.sequence = next_sequence_[k]++;
  a.period = period_;
  a.state_hash = sha256(payload);
  a.prev_anchor_hash = head();
  anchors_.push_back(a);
  payloads_.push_back(std::move(payload));
  p = Pending{};
}

void Ledger::close_period() {
  anchor(ContractKind::Matching, pending(ContractKind::Matching));
  anchor(ContractKind::Management, pending(ContractKind::Management));
  anchor(ContractKind::LstmRegistry, pending(ContractKind::LstmRegistry));
}

void Ledger::open_period(std::int64_t period) {
  if (period < period_) throw InvariantBreach("ledger periods must not go backwards");
  close_period();
  period_ = period;
}

LedgerResult Ledger::submit_bid(const Bid& bid, const AgentId& actor) {
  const auto role = allowlist_.role_of(actor);
  const AgentRole needed = bid.side == BidSide::ProsumerNet ? AgentRole::Prosumer : AgentRole::Ev;
  if (!role || *role != needed || bid.agent_id != actor) return LedgerResult::reject("unauthorized");
  if (bid.period_index < period_ || assigned_.count({bid.period_index, std::string{}})) {
    return LedgerResult::reject("closed period");
  }
  if (bid.period_index > period_) return LedgerResult::reject("period not open");
  if (!bids_.insert({bid.period_index, bid.agent_id}).second) return LedgerResult::reject("duplicate");

  Pending& p = pending(ContractKind::Matching);
  p.body.u8(kBidEntry);
  p.body.str(bid.agent_id);
  p.body.u8(static_cast<std::uint8_t>(bid.side));
  p.body.i64(bid.period_index);
  p.body.f64(bid.prosumer_forecast_net_kwh);
  p.body.f64(bid.ev_available_kwh);
  p.body.f64(bid.ev_headroom_kwh);
  p.body.i64(bid.submitted_at.seconds);
  ++p.count;
  return {true, {}, next_sequence_[static_cast<std::size_t>(ContractKind::Matching)]};
}

LedgerResult Ledger::record_assignment(const MatchAssignment& a) {
  if (a.period_index != period_) return LedgerResult::reject("closed period");
  try {
    a.check_one_matching();
  } catch (const InvariantBreach& e) {
    return LedgerResult::reject(e.what());
  }
  for (const auto& pair : a.pairs) {
    if (!bids_.count({a.period_index, pair.prosumer_id}) || !bids_.count({a.period_index, pair.ev_id})) {
      return LedgerResult::reject("pair " + pair.matching_id + " references a missing bid");
    }
    if (matching_ids_.count(pair.matching_id)) {
      return LedgerResult::reject("matching id " + pair.matching_id + " already recorded");
    }
    if (assigned_.count({a.period_index, pair.prosumer_id}) || assigned_.count({a.period_index, pair.ev_id})) {
      return LedgerResult::reject("agent already matched in period " + std::to_string(a.period_index));
    }
  }
  // The empty id marks the period's bidding as closed.
  assigned_.insert({a.period_index, std::string{}});
  Pending& p = pending(ContractKind::Matching);
  p.body.u8(kAssignmentEntry);
  p.body.i64(a.period_index);
  p.body.u8(static_cast<std::uint8_t>(a.algorithm));
  p.body.f64(a.total_cost_kwh);
  p.body.u32(static_cast<std::uint32_t>(a.pairs.size()));
  for (const auto& pair : a.pairs) {
    p.body.str(pair.prosumer_id);
    p.body.str(pair.ev_id);
    p.body.str(pair.matching_id);
    matching_ids_.emplace(pair.matching_id, std::make_pair(pair.prosumer_id, pair.ev_id));
    assigned_.insert({a.period_index, pair.prosumer_id});
    assigned_.insert({a.period_index, pair.ev_id});
  }
  ++p.count;
  return {true, {}, next_sequence_[static_cast<std::size_t>(ContractKind::Matching)]};
}

LedgerResult Ledger::log_trade(const TradeEvent& e) {
  const auto prosumer_role = allowlist_.role_of(e.prosumer_id);
  if (!prosumer_role || *prosumer_role != AgentRole::Prosumer) return LedgerResult::reject("unauthorized");
  if (!e.ev_id.empty()) {
    const auto ev_role = allowlist_.role_of(e.ev_id);
    if (!ev_role || *ev_role != AgentRole::Ev) return LedgerResult::reject("unauthorized");
  }
  if (!(e.energy_kwh > 0.0) || !std::isfinite(e.energy_kwh) || !std::isfinite(e.price_p_per_kwh)) {
    return LedgerResult::reject("malformed trade");
  }
  if (e.in_system()) {
    auto it = matching_ids_.find(e.matching_id);
    if (it == matching_ids_.end()) return LedgerResult::reject("unknown matching id " + e.matching_id);
    if (it->second.first != e.prosumer_id || it->second.second != e.ev_id) {
      return LedgerResult::reject("trade parties differ from matching " + e.matching_id);
    }
  } else if (e.matching_id != kGridMatchingId) {
    return LedgerResult::reject("grid trade must carry the GRID sentinel");
  }
  Pending& p = pending(ContractKind::Management);
  encode_trade(p.body, e);
  ++p.count;
  if (e.counterparty == Counterparty::ProsumerToEv) charged_evs_.insert(e.ev_id);
  return {true, {}, next_sequence_[static_cast<std::size_t>(ContractKind::Management)]};
}

LedgerResult Ledger::publish_params(const Digest& params_hash, std::uint64_t version) {
  const std::uint64_t expected = registry_version_ ? *registry_version_ + 1 : 0;
  if (registry_version_ && version <= *registry_version_) return LedgerResult::reject("stale version");
  if (version != expected) return LedgerResult::reject("gap");
  registry_version_ = version;
  Pending& p = pending(ContractKind::LstmRegistry);
  p.body.u64(version);
  p.body.digest(params_hash);
  ++p.count;
  return {true, {}, next_sequence_[static_cast<std::size_t>(ContractKind::LstmRegistry)]};
}

ChainVerdict verify_chain(const std::vector<AnchorRecord>& anchors, const std::vector<std::string>& payloads,
                          const std::optional<Digest>& head) {
  auto broken = [](std::size_t i, std::string why) { return ChainVerdict{false, i, std::move(why)}; };
  std::map<std::uint8_t, std::uint64_t> next_seq;
  Digest prev{};
  std::int64_t last_period = INT64_MIN;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const AnchorRecord& a = anchors[i];
    if (i >= payloads.size()) return broken(i, "missing payload");
    if (a.anchor_index != i) return broken(i, "anchor index out of order");
    const auto kind = static_cast<std::uint8_t>(a.contract);
    if (kind > 2) return broken(i, "unknown contract kind");
    if (sha256(payloads[i]) != a.state_hash) return broken(i, "payload digest mismatch");
    if (a.prev_anchor_hash != prev) return broken(i, "broken link to previous anchor");
    if (a.sequence != next_seq[kind]) return broken(i, "sequence not consecutive");
    if (a.period < last_period) return broken(i, "period went backwards");
    try {
      ByteReader r(payloads[i]);
      const PayloadHeader h = read_header(r);
      if (h.contract != kind || h.period != a.period || h.sequence != a.sequence) {
        return broken(i, "payload header disagrees with anchor");
      }
    } catch (const std::out_of_range&) {
      return broken(i, "truncated payload");
    }
    next_seq[kind] = a.sequence + 1;
    last_period = a.period;
    prev = a.digest();
  }
  if (payloads.size() > anchors.size()) return broken(anchors.size(), "payload without anchor");
  if (head && *head != prev) {
    return broken(anchors.empty() ? 0 : anchors.size() - 1, "chain head mismatch");
  }
  return {};
}

std::vector<TradeEvent> decode_trades(const std::vector<AnchorRecord>& anchors,
                                      const std::vector<std::string>& payloads) {
  std::vector<TradeEvent> out;
  for (std::size_t i = 0; i < anchors.size() && i < payloads.size(); ++i) {
    if (anchors[i].contract != ContractKind::Management) continue;
    ByteReader r(payloads[i]);
    const PayloadHeader h = read_header(r);
    for (std::uint32_t k = 0; k < h.count; ++k) out.push_back(decode_trade(r));
  }
  return out;
}

void write_anchors_csv(const std::vector<AnchorRecord>& anchors, std::ostream& out) {
  out << "anchor_index,contract,sequence,period,state_hash_hex,prev_hash_hex\n";
  for (const auto& a : anchors) {
    out << a.anchor_index << ',' << to_string(a.contract) << ',' << a.sequence << ',' << a.period << ','
        << to_hex(a.state_hash) << ',' << to_hex(a.prev_anchor_hash) << '\n';
  }
}

std::vector<AnchorRecord> read_anchors_csv(std::istream& in) {
  CsvReader reader(in, {"anchor_index", "contract", "sequence", "period", "state_hash_hex", "prev_hash_hex"});
  std::vector<AnchorRecord> out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    try {
      AnchorRecord a;
      a.anchor_index = static_cast<std::uint64_t>(parse_int(row[0]));
      a.contract = parse_contract_kind(row[1]);
      a.sequence = static_cast<std::uint64_t>(parse_int(row[2]));
      a.period = parse_int(row[3]);
      a.state_hash = digest_from_hex(row[4]);
      a.prev_anchor_hash = digest_from_hex(row[5]);
      out.push_back(a);
    } catch (const std::exception& e) {
      throw ConfigError("anchors row " + std::to_string(reader.line()) + ": " + e.what());
    }
  }
  return out;
}

void write_payloads(const std::vector<std::string>& payloads, std::ostream& out) {
  for (const auto& p : payloads) {
    ByteWriter w;
    w.u64(p.size());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    out.write(p.data(), static_cast<std::streamsize>(p.size()));
  }
}

std::vector<std::string> read_payloads(std::istream& in) {
  const std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(all);
  std::vector<std::string> out;
  try {
    while (!r.done()) {
      const std::uint64_t n = r.u64();
      if (n > r.remaining()) throw std::out_of_range("payload length overruns file");
      out.push_back(r.raw(static_cast<std::size_t>(n)));
    }
  } catch (const std::out_of_range&) {
    throw ConfigError("payload store is truncated");
  }
  return out;
}

}  // namespace v2g
