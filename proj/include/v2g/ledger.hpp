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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "v2g/bytes.hpp"
#include "v2g/domain.hpp"

namespace v2g {

enum class ContractKind : std::uint8_t { Matching = 0, Management = 1, LstmRegistry = 2 };

const char* to_string(ContractKind k);
ContractKind parse_contract_kind(const std::string& s);

enum class AgentRole { Prosumer, Ev };

/// Agents authorized to act on the chain.
class Allowlist {
 public:
  /// Throws ConfigError on a duplicate id.
  void add(const AgentId& id, AgentRole role);
  [[nodiscard]] std::optional<AgentRole> role_of(const AgentId& id) const;
  [[nodiscard]] std::size_t size() const { return roles_.size(); }

 private:
  std::map<AgentId, AgentRole> roles_;
};

/// One hash-chain entry committing a contract state change.
///
/// Canonical encoding (hashed to link the next anchor):
///   u64 anchor_index | u8 contract | u64 sequence | i64 period |
///   32 B state_hash | 32 B prev_anchor_hash
struct AnchorRecord {
  std::uint64_t anchor_index = 0;
  ContractKind contract = ContractKind::Matching;
  std::uint64_t sequence = 0;
  std::int64_t period = 0;
  Digest state_hash{};
  Digest prev_anchor_hash{};

  [[nodiscard]] std::string encode() const;
  [[nodiscard]] Digest digest() const { return sha256(encode()); }

  friend bool operator==(const AnchorRecord&, const AnchorRecord&) = default;
};

/// Outcome of a contract call. `error` is empty on success.
struct LedgerResult {
  bool accepted = true;
  std::string error;
  /// Contract sequence that will anchor the change.
  std::uint64_t sequence = 0;

  explicit operator bool() const { return accepted; }
  static LedgerResult reject(std::string why) { return {false, std::move(why), 0}; }
};

struct ChainVerdict {
  bool ok = true;
  std::optional<std::size_t> first_broken;
  std::string reason;
};

/// Simulated consortium chain: matching, real-time management and LSTM
/// registry contracts. Changes accumulate per matching period and are
/// anchored (one anchor per changed contract) when the period closes.
///
/// Payload layout per anchor (all integers little-endian, strings u32
/// length-prefixed, reals IEEE-754 binary64):
///   u8 contract | i64 period | u64 sequence | u32 entry_count | entries
/// Matching entries start with u8 0 (bid) or 1 (assignment); management
/// entries are trades; registry entries are u64 version + 32 B params hash.
class Ledger {
 public:
  explicit Ledger(Allowlist allowlist);

  /// Anchors pending changes of the open period and opens `period`.
  void open_period(std::int64_t period);
  /// Anchors pending changes of the open period.
  void close_period();
  [[nodiscard]] std::int64_t open_period_index() const { return period_; }

  LedgerResult submit_bid(const Bid& bid, const AgentId& actor);
  LedgerResult record_assignment(const MatchAssignment& a);
  LedgerResult log_trade(const TradeEvent& e);
  LedgerResult publish_params(const Digest& params_hash, std::uint64_t version);

  /// True iff the management contract holds a charge event for the EV.
  [[nodiscard]] bool has_charged(const AgentId& ev_id) const { return charged_evs_.count(ev_id) > 0; }
  [[nodiscard]] std::optional<std::uint64_t> registry_version() const { return registry_version_; }
  [[nodiscard]] bool knows_matching(const std::string& id) const { return matching_ids_.count(id) > 0; }

  [[nodiscard]] const std::vector<AnchorRecord>& anchors() const { return anchors_; }
  [[nodiscard]] const std::vector<std::string>& payloads() const { return payloads_; }
  /// Digest of the last anchor (all-zero for an empty chain).
  [[nodiscard]] Digest head() const;

 private:
  struct Pending {
    ByteWriter body;
    std::uint32_t count = 0;
  };

  void anchor(ContractKind kind, Pending& pending);
  Pending& pending(ContractKind k) { return pending_[static_cast<std::size_t>(k)]; }

  Allowlist allowlist_;
  std::int64_t period_ = 0;
  Pending pending_[3];
  std::uint64_t next_sequence_[3] = {0, 0, 0};
  std::vector<AnchorRecord> anchors_;
  std::vector<std::string> payloads_;

  std::set<std::pair<std::int64_t, AgentId>> bids_;
  std::map<std::string, std::pair<AgentId, AgentId>> matching_ids_;
  std::set<std::pair<std::int64_t, std::string>> assigned_;
  std::set<AgentId> charged_evs_;
  std::optional<std::uint64_t> registry_version_;
};

/// Recomputes every payload digest and anchor link. Reports the first anchor
/// whose fields, payload or link disagree. With `head`, also requires the
/// last anchor to hash to it; without, any intact prefix verifies.
ChainVerdict verify_chain(const std::vector<AnchorRecord>& anchors, const std::vector<std::string>& payloads,
                          const std::optional<Digest>& head = std::nullopt);

/// Trades recorded in management payloads, in anchor order.
std::vector<TradeEvent> decode_trades(const std::vector<AnchorRecord>& anchors,
                                      const std::vector<std::string>& payloads);

void write_anchors_csv(const std::vector<AnchorRecord>& anchors, std::ostream& out);
std::vector<AnchorRecord> read_anchors_csv(std::istream& in);
/// payloads.bin: per anchor, u64 length followed by the payload bytes.
void write_payloads(const std::vector<std::string>& payloads, std::ostream& out);
std::vector<std::string> read_payloads(std::istream& in);

}  // namespace v2g
