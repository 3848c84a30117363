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

#include <functional>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsnet/kms_types.hpp"

namespace qsnet {

enum class KeySource { QKD, RELAYED };

struct KeyBlock {
  std::string key_id;
  KeyMaterial key;
  std::string link_id;
  bool consumed = false;
  KeySource source = KeySource::QKD;
};

/// Per-node key manager: one store side per attached QKD link, one-time-use
/// delivery, and hop-by-hop OTP relay forwarding under controller-installed
/// rules. All state is in-memory.
class KmsService {
 public:
  /// Sends an envelope to the KMS at `endpoint` (next hop of a relay chain).
  using Forwarder = std::function<void(const std::string& endpoint, const RelayEnvelope&)>;
  /// Tops up the named link's stores by one key pair; returns false when the
  /// quantum plane cannot produce more.
  using Refill = std::function<bool(const std::string& link_id)>;

  KmsService(std::string kms_id, std::string node_id)
      : kms_id_(std::move(kms_id)), node_id_(std::move(node_id)) {}

  const std::string& kms_id() const { return kms_id_; }
  const std::string& node_id() const { return node_id_; }

  void attach_link(const std::string& link_id, const std::string& peer_node,
                   std::size_t key_size_bits);
  void insert_link_key(const std::string& link_id, const std::string& key_id,
                       const KeyMaterial& key);
  void set_forwarder(Forwarder f) { forwarder_ = std::move(f); }
  void set_refill(Refill r) { refill_ = std::move(r); }
  void set_link_up(const std::string& link_id, bool up);

  /// Consumes and returns `number` fresh link keys toward `peer` (a peer
  /// node id, KMS id, or link id). The peer side can still fetch the same
  /// ids via get_key_with_id.
  std::vector<KeyWithId> get_key(const std::string& caller_app, const std::string& peer,
                                 std::size_t number, std::size_t size_bits);
  std::vector<KeyWithId> get_key_with_id(const std::string& caller_app,
                                         const std::vector<std::string>& key_ids);
  KmsStatus status(const std::string& peer) const;

  void install_relay_rule(const RelayRule& rule);
  void remove_relay_rule(const std::string& session_id);

  /// Executes this node's hop of the relay chain and forwards downstream;
  /// at the terminal hop the recovered key is parked for fetch_relayed.
  void forward_relayed_key(const RelayEnvelope& env);
  KeyWithId fetch_relayed(const std::string& session_id);

  bool has_relay_rule(const std::string& session_id) const;
  bool has_relayed_key(const std::string& session_id) const;

 private:
  struct LinkStore {
    std::string link_id;
    std::string peer_node;
    std::size_t key_size_bits = 0;
    bool up = true;
    std::vector<KeyBlock> blocks;
    std::unordered_map<std::string, std::size_t> by_id;
    std::size_t cursor = 0;  // first index that may be unconsumed
  };

  struct RelayedKey {
    std::string key_id;
    KeyMaterial key;
    bool fetched = false;
  };

  LinkStore& store_for_peer_locked(const std::string& peer);
  const LinkStore& store_for_peer_locked(const std::string& peer) const;
  std::size_t unconsumed_locked(const LinkStore& s) const;
  KeyWithId take_next_locked(LinkStore& s);

  /// One fresh pad from link_id's store, refilling through the quantum
  /// plane when the stock is empty.
  KeyWithId take_pad(const std::string& link_id);
  KeyMaterial take_pad_by_id(const std::string& link_id, const std::string& key_id);

  std::string kms_id_;
  std::string node_id_;
  Forwarder forwarder_;
  Refill refill_;
  std::unordered_map<std::string, LinkStore> links_;
  std::unordered_map<std::string, RelayRule> rules_;
  std::unordered_map<std::string, RelayedKey> relayed_;
  mutable std::mutex mu_;
};

}  // namespace qsnet
