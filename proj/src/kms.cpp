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

#include "qsnet/kms.hpp"

#include "qsnet/errors.hpp"
#include "qsnet/otp.hpp"

namespace qsnet {

void KmsService::attach_link(const std::string& link_id, const std::string& peer_node,
                             std::size_t key_size_bits) {
  std::lock_guard lock(mu_);
  if (links_.count(link_id))
    throw Error(Errc::DuplicateId, "link '" + link_id + "' already attached");
  LinkStore s;
  s.link_id = link_id;
  s.peer_node = peer_node;
  s.key_size_bits = key_size_bits;
  links_.emplace(link_id, std::move(s));
}

void KmsService::insert_link_key(const std::string& link_id, const std::string& key_id,
                                 const KeyMaterial& key) {
  std::lock_guard lock(mu_);
  auto it = links_.find(link_id);
  if (it == links_.end())
    throw Error(Errc::UnknownLink, "no store for link '" + link_id + "'");
  LinkStore& s = it->second;
  if (s.by_id.count(key_id))
    throw Error(Errc::DuplicateId, "key id already present on '" + link_id + "'");
  s.by_id.emplace(key_id, s.blocks.size());
  s.blocks.push_back(KeyBlock{key_id, key, link_id, false, KeySource::QKD});
}

void KmsService::set_link_up(const std::string& link_id, bool up) {
  std::lock_guard lock(mu_);
  auto it = links_.find(link_id);
  if (it == links_.end())
    throw Error(Errc::UnknownLink, "no store for link '" + link_id + "'");
  it->second.up = up;
}

KmsService::LinkStore& KmsService::store_for_peer_locked(const std::string& peer) {
  auto it = links_.find(peer);
  if (it != links_.end()) return it->second;
  for (auto& [id, s] : links_) {
    if (s.peer_node == peer || "KMS_" + s.peer_node == peer) return s;
  }
  throw Error(Errc::UnknownLink, "no link toward '" + peer + "'");
}

const KmsService::LinkStore& KmsService::store_for_peer_locked(
    const std::string& peer) const {
  return const_cast<KmsService*>(this)->store_for_peer_locked(peer);
}

std::size_t KmsService::unconsumed_locked(const LinkStore& s) const {
  std::size_t n = 0;
  for (std::size_t i = s.cursor; i < s.blocks.size(); ++i)
    if (!s.blocks[i].consumed) ++n;
  return n;
}

KeyWithId KmsService::take_next_locked(LinkStore& s) {
  while (s.cursor < s.blocks.size() && s.blocks[s.cursor].consumed) ++s.cursor;
  if (s.cursor >= s.blocks.size())
    throw Error(Errc::KeysExhausted, "link '" + s.link_id + "' has no fresh keys");
  KeyBlock& b = s.blocks[s.cursor];
  b.consumed = true;
  ++s.cursor;
  KeyWithId out{b.key_id, b.key};
  b.key.wipe();
  return out;
}

std::vector<KeyWithId> KmsService::get_key(const std::string& caller_app,
                                           const std::string& peer, std::size_t number,
                                           std::size_t size_bits) {
  (void)caller_app;
  if (number == 0)
    throw Error(Errc::InvalidRequest, "number of keys must be positive");
  std::string link_id;
  for (int attempt = 0; ; ++attempt) {
    {
      std::lock_guard lock(mu_);
      LinkStore& s = store_for_peer_locked(peer);
      link_id = s.link_id;
      if (!s.up)
        throw Error(Errc::ServiceUnavailable, "link '" + s.link_id + "' is down");
      if (size_bits != s.key_size_bits)
        throw Error(Errc::SizeUnavailable,
                    "link '" + s.link_id + "' serves " +
                        std::to_string(s.key_size_bits) + "-bit keys, not " +
                        std::to_string(size_bits));
      if (unconsumed_locked(s) >= number) {
        std::vector<KeyWithId> out;
        out.reserve(number);
        for (std::size_t i = 0; i < number; ++i) out.push_back(take_next_locked(s));
        return out;
      }
    }
    // Refill outside the lock: the quantum plane inserts into both endpoint
    // stores, including this one.
    if (attempt >= 64 || !refill_ || !refill_(link_id))
      throw Error(Errc::KeysExhausted, "link '" + link_id + "' stock insufficient");
  }
}

std::vector<KeyWithId> KmsService::get_key_with_id(
    const std::string& caller_app, const std::vector<std::string>& key_ids) {
  (void)caller_app;
  if (key_ids.empty())
    throw Error(Errc::InvalidRequest, "key_ids must be non-empty");
  std::lock_guard lock(mu_);
  // Two phases so a bad id mid-list cannot half-consume the request.
  std::vector<KeyBlock*> found;
  for (const auto& id : key_ids) {
    KeyBlock* block = nullptr;
    for (auto& [lid, s] : links_) {
      auto it = s.by_id.find(id);
      if (it != s.by_id.end()) {
        block = &s.blocks[it->second];
        break;
      }
    }
    if (!block) throw Error(Errc::UnknownKeyId, "no key with id '" + id + "'");
    if (block->consumed)
      throw Error(Errc::AlreadyConsumed, "key '" + id + "' was already served");
    found.push_back(block);
  }
  std::vector<KeyWithId> out;
  out.reserve(found.size());
  for (KeyBlock* b : found) {
    b->consumed = true;
    out.push_back(KeyWithId{b->key_id, b->key});
    b->key.wipe();
  }
  return out;
}

KmsStatus KmsService::status(const std::string& peer) const {
  std::lock_guard lock(mu_);
  const LinkStore& s = store_for_peer_locked(peer);
  return KmsStatus{unconsumed_locked(s), s.key_size_bits, s.up};
}

void KmsService::install_relay_rule(const RelayRule& rule) {
  std::lock_guard lock(mu_);
  if (rule.upstream.empty() && rule.downstream.empty())
    throw Error(Errc::ValidationError, "relay rule needs an upstream or downstream");
  if (rules_.count(rule.session_id))
    throw Error(Errc::DuplicateSession,
                "relay rule for session '" + rule.session_id + "' already installed");
  for (const auto& link : {rule.link_in, rule.link_out}) {
    if (!link.empty() && !links_.count(link))
      throw Error(Errc::UnknownLink, "rule references unattached link '" + link + "'");
  }
  rules_.emplace(rule.session_id, rule);
}

void KmsService::remove_relay_rule(const std::string& session_id) {
  std::lock_guard lock(mu_);
  rules_.erase(session_id);
  relayed_.erase(session_id);
}

KeyWithId KmsService::take_pad(const std::string& link_id) {
  for (int attempt = 0; ; ++attempt) {
    {
      std::lock_guard lock(mu_);
      auto it = links_.find(link_id);
      if (it == links_.end())
        throw Error(Errc::UnknownLink, "no store for link '" + link_id + "'");
      if (!it->second.up)
        throw Error(Errc::ServiceUnavailable, "link '" + link_id + "' is down");
      if (unconsumed_locked(it->second) > 0) return take_next_locked(it->second);
    }
    if (attempt >= 64 || !refill_ || !refill_(link_id))
      throw Error(Errc::LinkKeysExhausted, "no pad available on '" + link_id + "'");
  }
}

KeyMaterial KmsService::take_pad_by_id(const std::string& link_id,
                                       const std::string& key_id) {
  std::lock_guard lock(mu_);
  auto it = links_.find(link_id);
  if (it == links_.end())
    throw Error(Errc::UnknownLink, "no store for link '" + link_id + "'");
  LinkStore& s = it->second;
  auto idx = s.by_id.find(key_id);
  if (idx == s.by_id.end())
    throw Error(Errc::UnknownKeyId, "no pad with id '" + key_id + "' on '" + link_id + "'");
  KeyBlock& b = s.blocks[idx->second];
  if (b.consumed)
    throw Error(Errc::AlreadyConsumed, "pad '" + key_id + "' was already used");
  b.consumed = true;
  KeyMaterial pad = b.key;
  b.key.wipe();
  return pad;
}

void KmsService::forward_relayed_key(const RelayEnvelope& env) {
  RelayRule rule;
  {
    std::lock_guard lock(mu_);
    auto it = rules_.find(env.session_id);
    if (it == rules_.end())
      throw Error(Errc::NoRule, "no relay rule for session '" + env.session_id + "'");
    rule = it->second;
  }

  // Recover the transiting key: plaintext at the entry hop, otherwise
  // unwrap with this side's twin of the upstream pad.
  KeyMaterial key;
  if (rule.link_in.empty()) {
    key = KeyMaterial(Bytes(env.payload));
  } else {
    if (env.pad_key_id.empty())
      throw Error(Errc::ValidationError, "intermediate hop requires pad_key_id");
    KeyMaterial pad = take_pad_by_id(rule.link_in, env.pad_key_id);
    key = otp_transform(KeyMaterial(Bytes(env.payload)), pad);
  }

  if (rule.link_out.empty()) {
    // Terminal hop: park for the local vKMS.
    std::lock_guard lock(mu_);
    relayed_[env.session_id] = RelayedKey{env.key_id, key, false};
    return;
  }

  // Re-encrypt with a fresh pad and pass downstream. The downstream call is
  // made without holding the store lock.
  KeyWithId pad = take_pad(rule.link_out);
  KeyMaterial wrapped = otp_transform(key, pad.key);
  if (!forwarder_)
    throw Error(Errc::Internal, "KMS '" + kms_id_ + "' has no forwarder configured");
  RelayEnvelope next;
  next.session_id = env.session_id;
  next.key_id = env.key_id;
  next.payload = wrapped.bytes();
  next.pad_key_id = pad.key_id;
  forwarder_(rule.downstream_endpoint, next);
}

KeyWithId KmsService::fetch_relayed(const std::string& session_id) {
  std::lock_guard lock(mu_);
  auto it = relayed_.find(session_id);
  if (it == relayed_.end())
    throw Error(Errc::NoRelayedKey, "no relayed key for session '" + session_id + "'");
  if (it->second.fetched)
    throw Error(Errc::AlreadyConsumed,
                "relayed key for session '" + session_id + "' already fetched");
  it->second.fetched = true;
  return KeyWithId{it->second.key_id, it->second.key};
}

bool KmsService::has_relay_rule(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return rules_.count(session_id) > 0;
}

bool KmsService::has_relayed_key(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = relayed_.find(session_id);
  return it != relayed_.end() && !it->second.fetched;
}

}  // namespace qsnet
