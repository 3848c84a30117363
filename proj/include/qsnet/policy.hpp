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

// Session configuration policy: the controller computes one document per
// session and distributes it to every participant, which extracts its own
// block. Schema documented in docs/policy_schema.md (version 1).

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsnet/kem.hpp"
#include "qsnet/kms_types.hpp"
#include "qsnet/level.hpp"

namespace qsnet {

enum class ParticipantRole {
  RECEIVER,      // L3: classical endpoint, runs the KEM and receives the relayed key
  PASSIVE,       // L3: quantum endpoint, fetches the QKD key
  RELAY,         // L3: QN adjacent to the passive, re-encapsulates the key
  ENDPOINT,      // L4: either side of the pure-PQC exchange
  L1_ENDPOINT,   // L1: direct-link endpoint
  L2_ENDPOINT,   // L2: relay-chain endpoint
};

const char* role_name(ParticipantRole r);
ParticipantRole role_from_name(const std::string& s);

struct PeerRef {
  std::string node_id;
  std::string app;
  std::string endpoint;
};

struct ParticipantPolicy {
  std::string node_id;
  ParticipantRole role = ParticipantRole::ENDPOINT;
  std::string app;                       // session app hosted at this node, if any
  std::string vkms_endpoint;
  bool initiator = false;
  std::vector<KemSuiteId> kem_suites;
  std::vector<std::string> kdf_recipe;   // ordered labels for kdf_combine
  std::map<std::string, PeerRef> peers;  // keyed by peer role name
  std::string kms_id;
  std::string kms_endpoint;
  std::string link_id;                   // QKD link this role consumes, if any
  std::vector<std::string> relay_path;
};

struct SessionPolicy {
  int version = 1;
  std::string session_id;
  std::string session_key_id;  // app-visible key id, minted at configuration
  SecurityLevel level = SecurityLevel::L4;
  std::string initiator_app;
  std::string target_app;
  std::size_t out_len_bits = 256;
  bool dual_kem = false;
  std::vector<ParticipantPolicy> participants;
  std::vector<RelayRule> relay_rules;  // L2 only
  nlohmann::json requirements = nlohmann::json::object();  // reserved

  const ParticipantPolicy* block_for_node(const std::string& node_id) const;
};

/// Structural checks: role counts per level, matching session ids, non-empty
/// key id. Throws ValidationError.
void validate_policy(const SessionPolicy& policy);

void to_json(nlohmann::json& j, const SessionPolicy& p);
void from_json(const nlohmann::json& j, SessionPolicy& p);
void to_json(nlohmann::json& j, const ParticipantPolicy& p);
void from_json(const nlohmann::json& j, ParticipantPolicy& p);
void to_json(nlohmann::json& j, const RelayRule& r);
void from_json(const nlohmann::json& j, RelayRule& r);

}  // namespace qsnet
