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

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsnet/clients.hpp"
#include "qsnet/kdf.hpp"
#include "qsnet/policy.hpp"
#include "qsnet/rng.hpp"
#include "qsnet/timings.hpp"

namespace qsnet {

struct VkmsConfig {
  std::string node_id;
  NodeKind kind = NodeKind::CN;
  std::vector<std::string> hosted_apps;
  std::string kms_id;         // empty on classical nodes
  std::string kms_endpoint;   // empty on classical nodes
  std::string qusec_endpoint;
  std::string self_endpoint;
};

/// Per-node key agent. Holds installed session policies, runs the
/// level-specific derivation engine on the initiator side, answers peer
/// session messages on the responder side, and hands finished keys to the
/// local applications. Key material never crosses the controller.
///
/// Session message types:
///   l1_deliver  L1: initiator names the consumed direct-link key
///   l2_notify   L2: initiator names the key relayed hop-by-hop via KMS
///   l3_start    L3, receiver-driven: receiver sends its KEM public keys
///   l3_offer    L3, passive-driven: passive asks receiver for public keys
///   l3_run      L3, passive-driven: passive delivers ciphertexts + relay leg
///   l3_relay    L3: passive asks the relay QN to wrap the QKD key
///   l4_start    L4: initiator sends one (or two) KEM public keys
///   confirm     key-confirmation tag exchange where not embedded
///   abort       purge all session state, fail closed
class Vkms : public VkmsAppClient {
 public:
  Vkms(VkmsConfig cfg, std::shared_ptr<ClientFactory> factory,
       std::shared_ptr<RandomSource> rng = nullptr);

  // Control plane (controller-facing).
  void install_policy(const SessionPolicy& policy);
  void remove_policy(const std::string& session_id);

  // Peer plane (vKMS-to-vKMS).
  nlohmann::json session_message(const std::string& session_id,
                                 const std::string& type,
                                 const nlohmann::json& body);

  // Application plane.
  AppKeyResult app_get_key(const std::string& initiator_app,
                           const std::string& target_app,
                           std::size_t size_bits) override;
  AppKeyResult app_get_key_with_id(const std::string& caller_app,
                                   const std::string& key_id) override;

  const VkmsConfig& config() const { return cfg_; }
  bool has_policy(const std::string& session_id) const;
  bool has_pending(const std::string& session_id) const;
  bool has_delivered_key(const std::string& key_id) const;

 private:
  struct PendingSession {
    KeyMaterial key;  // responder-derived key awaiting confirmation
    Bytes sk1;        // receiver-side KEM secrets awaiting l3_run
    Bytes sk_aux;
  };
  struct DeliveredKey {
    std::string session_id;
    KeyMaterial key;
    SecurityLevel level = SecurityLevel::L4;
    std::string target_app;
    bool delivered = false;
  };

  // Initiator-side engines. Each returns the finished session key.
  KeyMaterial run_level1(const SessionPolicy& policy, const ParticipantPolicy& self);
  KeyMaterial run_level2(const SessionPolicy& policy, const ParticipantPolicy& self);
  KeyMaterial run_level3(const SessionPolicy& policy, const ParticipantPolicy& self);
  KeyMaterial run_level4(const SessionPolicy& policy, const ParticipantPolicy& self);

  // Responder-side handlers.
  nlohmann::json handle_l1_deliver(const SessionPolicy& policy,
                                   const ParticipantPolicy& self,
                                   const nlohmann::json& body);
  nlohmann::json handle_l2_notify(const SessionPolicy& policy,
                                  const ParticipantPolicy& self,
                                  const nlohmann::json& body);
  nlohmann::json handle_l3_start(const SessionPolicy& policy,
                                 const ParticipantPolicy& self,
                                 const nlohmann::json& body);
  nlohmann::json handle_l3_offer(const SessionPolicy& policy,
                                 const ParticipantPolicy& self);
  nlohmann::json handle_l3_run(const SessionPolicy& policy,
                               const ParticipantPolicy& self,
                               const nlohmann::json& body);
  nlohmann::json handle_l3_relay(const SessionPolicy& policy,
                                 const ParticipantPolicy& self,
                                 const nlohmann::json& body);
  nlohmann::json handle_l4_start(const SessionPolicy& policy,
                                 const ParticipantPolicy& self,
                                 const nlohmann::json& body);
  nlohmann::json handle_confirm(const SessionPolicy& policy,
                                const ParticipantPolicy& self,
                                const nlohmann::json& body);
  nlohmann::json handle_abort(const std::string& session_id);

  // Shared pieces.
  const ParticipantPolicy& own_block(const SessionPolicy& policy) const;
  SessionPolicy policy_copy(const std::string& session_id) const;
  DerivationContext ctx_for(const SessionPolicy& policy, std::size_t out_len_bits) const;
  Bytes confirm_tag(const SessionPolicy& policy, const KeyMaterial& key,
                    const char* side_label) const;
  Bytes relay_leg_tag(const SessionPolicy& policy, const KeyMaterial& aux,
                      const std::string& qk_id, BytesView ct_aux, BytesView enc) const;
  KeyMaterial relay_leg_pad(const SessionPolicy& policy, const KeyMaterial& aux,
                            std::size_t qk_bytes) const;
  KeyMaterial finish_direct_key(const SessionPolicy& policy, const std::string& label,
                                KeyMaterial transported) const;
  KeyWithId fetch_fresh_qkd_key(const ParticipantPolicy& self, const std::string& app);
  void store_delivered(const SessionPolicy& policy, KeyMaterial key);
  void purge_session(const std::string& session_id);
  void abort_peers(const SessionPolicy& policy);

  VkmsConfig cfg_;
  std::shared_ptr<ClientFactory> factory_;
  std::shared_ptr<RandomSource> rng_;

  std::map<std::string, SessionPolicy> policies_;
  std::map<std::string, PendingSession> pending_;
  std::map<std::string, DeliveredKey> delivered_;  // keyed by app-visible key id
  mutable std::mutex mu_;
};

}  // namespace qsnet
