/*
 * Copyright 2026 The qsnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qsnet/clients.hpp"
#include "qsnet/policy.hpp"
#include "qsnet/rng.hpp"
#include "qsnet/topology.hpp"

namespace qsnet {

enum class SessionState { CONFIGURED, DERIVED, DELIVERED_BOTH };

const char* session_state_name(SessionState s);

struct SessionRecord {
  std::string session_id;
  std::string initiator_app;
  std::string target_app;
  SecurityLevel level = SecurityLevel::L4;
  std::string derived_key_id;
  SessionState state = SessionState::CONFIGURED;
  std::chrono::steady_clock::time_point touched;
};

struct QusecConfig {
  KemSuiteId kem_suite = KemSuiteId::ML_KEM_768;
  bool dual_kem = false;
  std::chrono::seconds session_ttl{600};
};

/// Centralized controller: topology registry, security-level assignment,
/// relay-path computation, policy generation/distribution, and session
/// state. Never sees key material; only identifiers and metadata.
class Qusec {
 public:
  Qusec(std::shared_ptr<ClientFactory> factory, QusecConfig cfg = {},
        std::shared_ptr<RandomSource> rng = nullptr);

  void register_node(const NodeDescriptor& node);
  void register_link(const QkdLinkInfo& link);

  /// Highest feasible level for the pair, under the preference ordering
  /// L1 > L2 > L3 > L4:
  ///   L1  both endpoints QN sharing a direct QKD link
  ///   L2  both endpoints QN with a multi-hop quantum path
  ///   L3  exactly one endpoint QN, with at least one QKD link to a relay QN
  ///   L4  otherwise
  SecurityLevel assign_security_level(const std::string& src_app,
                                      const std::string& dst_app);

  /// Shortest quantum path by hop count, deterministic under ties.
  std::vector<std::string> compute_relay_path(const std::string& src_node,
                                              const std::string& dst_node);

  /// Builds the session policy for an already-assigned level. Exposed
  /// separately from configuration_request for direct inspection.
  SessionPolicy compute_policy(const std::string& session_id,
                               const std::string& src_app, const std::string& dst_app,
                               SecurityLevel level, std::size_t out_len_bits);

  /// Full configuration step: validates the level is still feasible, mints
  /// session and key ids, computes the policy, distributes it to every
  /// participant (rolling back on partial failure), records the session as
  /// CONFIGURED, and returns the policy.
  SessionPolicy configuration_request(const std::string& src_app,
                                      const std::string& dst_app, SecurityLevel level,
                                      std::size_t out_len_bits);

  /// Pushes a policy to all participants. On any failure the already-acked
  /// installs are removed and ParticipantUnreachable is thrown.
  void distribute_policy(const SessionPolicy& policy);

  /// Target-side bypass lookup by app-visible key id. Flips DERIVED
  /// sessions to DELIVERED_BOTH.
  SessionLookup lookup_session_for_target(const std::string& target_app,
                                          const std::string& key_id);

  void report_derived(const std::string& session_id, const std::string& key_id);

  QusecStats stats() const;
  const Topology& topology() const { return topology_; }
  SessionRecord session(const std::string& session_id) const;

 private:
  struct PairNodes {
    const NodeDescriptor* src;
    const NodeDescriptor* dst;
  };
  PairNodes resolve_pair(const std::string& src_app, const std::string& dst_app) const;
  std::string relay_for(const std::string& passive_node) const;
  std::string mint_uuid();
  void sweep_expired_locked();

  SessionPolicy compute_policy_locked(const std::string& session_id,
                                      const std::string& session_key_id,
                                      const std::string& src_app,
                                      const std::string& dst_app, SecurityLevel level,
                                      std::size_t out_len_bits) const;
  SecurityLevel assign_locked(const std::string& src_app,
                              const std::string& dst_app) const;

  std::shared_ptr<ClientFactory> factory_;
  QusecConfig cfg_;
  std::shared_ptr<RandomSource> rng_;
  Topology topology_;
  std::map<std::string, SessionRecord> sessions_;
  std::map<std::string, std::string> key_to_session_;
  mutable std::mutex mu_;

  std::atomic<std::uint64_t> level_requests_{0};
  std::atomic<std::uint64_t> config_requests_{0};
  std::atomic<std::uint64_t> session_lookups_{0};
  std::atomic<std::uint64_t> derived_reports_{0};
};

}  // namespace qsnet
