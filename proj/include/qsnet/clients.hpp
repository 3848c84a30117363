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

// Transport-agnostic client interfaces. Services talk to each other only
// through these, so the same protocol logic runs in-process (direct calls)
// and over loopback HTTP. Endpoint strings select the transport:
// "inproc:<id>" or "http://127.0.0.1:<port>".

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsnet/kms_types.hpp"
#include "qsnet/policy.hpp"
#include "qsnet/timings.hpp"
#include "qsnet/topology.hpp"

namespace qsnet {

struct SessionLookup {
  std::string session_id;
  SecurityLevel level = SecurityLevel::L4;
  std::string initiator_app;
  std::string target_app;
  std::string state;
};

struct QusecStats {
  std::uint64_t level_requests = 0;
  std::uint64_t config_requests = 0;
  std::uint64_t session_lookups = 0;
  std::uint64_t derived_reports = 0;
};

class QusecClient {
 public:
  virtual ~QusecClient() = default;
  virtual void register_node(const NodeDescriptor& node) = 0;
  virtual void register_link(const QkdLinkInfo& link) = 0;
  virtual SecurityLevel security_level_request(const std::string& src_app,
                                               const std::string& dst_app) = 0;
  virtual SessionPolicy configuration_request(const std::string& src_app,
                                              const std::string& dst_app,
                                              SecurityLevel level,
                                              std::size_t out_len_bits) = 0;
  virtual SessionLookup session_lookup(const std::string& target_app,
                                       const std::string& key_id) = 0;
  virtual void report_derived(const std::string& session_id,
                              const std::string& key_id) = 0;
  virtual QusecStats stats() = 0;
};

class KmsClient {
 public:
  virtual ~KmsClient() = default;
  virtual std::vector<KeyWithId> get_key(const std::string& caller_app,
                                         const std::string& peer, std::size_t number,
                                         std::size_t size_bits) = 0;
  virtual std::vector<KeyWithId> get_key_with_id(
      const std::string& caller_app, const std::vector<std::string>& key_ids) = 0;
  virtual KmsStatus status(const std::string& peer) = 0;
  virtual void install_relay_rule(const RelayRule& rule) = 0;
  virtual void remove_relay_rule(const std::string& session_id) = 0;
  virtual void forward_relayed_key(const RelayEnvelope& env) = 0;
  virtual KeyWithId fetch_relayed(const std::string& session_id) = 0;
  virtual void ping() = 0;
};

/// Control and session channel of a vKMS, as seen by the controller and by
/// peer vKMSs.
class VkmsClient {
 public:
  virtual ~VkmsClient() = default;
  virtual void install_policy(const SessionPolicy& policy) = 0;
  virtual void remove_policy(const std::string& session_id) = 0;
  virtual nlohmann::json session_message(const std::string& session_id,
                                         const std::string& type,
                                         const nlohmann::json& body) = 0;
};

struct AppKeyResult {
  std::string key_id;
  KeyMaterial key;
  SecurityLevel level = SecurityLevel::L4;
  PhaseTimings timings;
};

/// Application-facing face of a vKMS (what a consuming app would call).
class VkmsAppClient {
 public:
  virtual ~VkmsAppClient() = default;
  virtual AppKeyResult app_get_key(const std::string& initiator_app,
                                   const std::string& target_app,
                                   std::size_t size_bits) = 0;
  virtual AppKeyResult app_get_key_with_id(const std::string& caller_app,
                                           const std::string& key_id) = 0;
};

class ClientFactory {
 public:
  virtual ~ClientFactory() = default;
  virtual std::shared_ptr<QusecClient> qusec(const std::string& endpoint) = 0;
  virtual std::shared_ptr<KmsClient> kms(const std::string& endpoint) = 0;
  virtual std::shared_ptr<VkmsClient> vkms(const std::string& endpoint) = 0;
};

}  // namespace qsnet
