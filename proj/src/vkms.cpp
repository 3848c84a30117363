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

#include "qsnet/vkms.hpp"

#include <algorithm>
#include <chrono>

#include "qsnet/errors.hpp"
#include "qsnet/hash.hpp"
#include "qsnet/kem.hpp"

namespace qsnet {

namespace {

using nlohmann::json;

std::string str_field(const json& body, const char* name) {
  if (!body.contains(name) || !body.at(name).is_string())
    throw Error(Errc::ParseError, std::string("missing field '") + name + "'");
  return body.at(name).get<std::string>();
}

Bytes bytes_field(const json& body, const char* name) {
  return from_hex(str_field(body, name));
}

bool hosted(const std::vector<std::string>& apps, const std::string& app) {
  return std::find(apps.begin(), apps.end(), app) != apps.end();
}

void wipe_secrets(Bytes& sk1, Bytes& sk2) {
  secure_wipe(sk1);
  secure_wipe(sk2);
}

}  // namespace

Vkms::Vkms(VkmsConfig cfg, std::shared_ptr<ClientFactory> factory,
           std::shared_ptr<RandomSource> rng)
    : cfg_(std::move(cfg)), factory_(std::move(factory)), rng_(std::move(rng)) {
  if (!rng_) rng_ = std::shared_ptr<RandomSource>(&SystemRandom::instance(),
                                                  [](RandomSource*) {});
}

const ParticipantPolicy& Vkms::own_block(const SessionPolicy& policy) const {
  const ParticipantPolicy* p = policy.block_for_node(cfg_.node_id);
  if (!p)
    throw Error(Errc::ValidationError,
                "policy for session '" + policy.session_id +
                    "' has no participant block for node '" + cfg_.node_id + "'");
  return *p;
}

SessionPolicy Vkms::policy_copy(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = policies_.find(session_id);
  if (it == policies_.end())
    throw Error(Errc::UnknownSession, "no policy installed for session '" + session_id + "'");
  return it->second;
}

DerivationContext Vkms::ctx_for(const SessionPolicy& policy,
                                std::size_t out_len_bits) const {
  return DerivationContext{policy.session_id, policy.initiator_app, policy.target_app,
                           policy.level, out_len_bits};
}

Bytes Vkms::confirm_tag(const SessionPolicy& policy, const KeyMaterial& key,
                        const char* side_label) const {
  KeyMaterial conf = kdf_combine({{"confirm", key}}, ctx_for(policy, 256));
  Bytes msg = to_bytes("qsnet-confirm");
  put_lv(msg, policy.session_id);
  put_lv(msg, std::string(side_label));
  return hmac_sha256(conf.view(), msg);
}

Bytes Vkms::relay_leg_tag(const SessionPolicy& policy, const KeyMaterial& aux,
                          const std::string& qk_id, BytesView ct_aux,
                          BytesView enc) const {
  KeyMaterial mac_key = kdf_combine({{"relay-mac", aux}}, ctx_for(policy, 256));
  Bytes msg;
  put_lv(msg, policy.session_id);
  put_lv(msg, qk_id);
  put_lv(msg, ct_aux);
  put_lv(msg, enc);
  return hmac_sha256(mac_key.view(), msg);
}

KeyMaterial Vkms::relay_leg_pad(const SessionPolicy& policy, const KeyMaterial& aux,
                                std::size_t qk_bytes) const {
  if (aux.size() == qk_bytes) return aux;
  return kdf_combine({{"pad-expand", aux}}, ctx_for(policy, qk_bytes * 8));
}

KeyMaterial Vkms::finish_direct_key(const SessionPolicy& policy,
                                    const std::string& label,
                                    KeyMaterial transported) const {
  if (transported.length_bits() == policy.out_len_bits) return transported;
  return kdf_combine({{label, transported}}, ctx_for(policy, policy.out_len_bits));
}

KeyWithId Vkms::fetch_fresh_qkd_key(const ParticipantPolicy& self,
                                    const std::string& app) {
  auto kms = factory_->kms(self.kms_endpoint);
  KmsStatus st = kms->status(self.link_id);
  auto keys = kms->get_key(app, self.link_id, 1, st.key_size_bits);
  return keys.at(0);
}

void Vkms::store_delivered(const SessionPolicy& policy, KeyMaterial key) {
  std::lock_guard lock(mu_);
  DeliveredKey dk;
  dk.session_id = policy.session_id;
  dk.key = std::move(key);
  dk.level = policy.level;
  dk.target_app = policy.target_app;
  delivered_[policy.session_key_id] = std::move(dk);
}

void Vkms::purge_session(const std::string& session_id) {
  std::lock_guard lock(mu_);
  auto pit = pending_.find(session_id);
  if (pit != pending_.end()) {
    wipe_secrets(pit->second.sk1, pit->second.sk_aux);
    pending_.erase(pit);
  }
  for (auto it = delivered_.begin(); it != delivered_.end();) {
    if (it->second.session_id == session_id)
      it = delivered_.erase(it);
    else
      ++it;
  }
  policies_.erase(session_id);
}

void Vkms::abort_peers(const SessionPolicy& policy) {
  for (const auto& p : policy.participants) {
    if (p.node_id == cfg_.node_id) continue;
    try {
      factory_->vkms(p.vkms_endpoint)
          ->session_message(policy.session_id, "abort", json::object());
    } catch (...) {
      // Fail-closed cleanup is best effort; a dead peer has nothing to purge.
    }
  }
}

void Vkms::install_policy(const SessionPolicy& policy) {
  validate_policy(policy);
  const ParticipantPolicy& self = own_block(policy);

  const bool needs_qn = self.role == ParticipantRole::PASSIVE ||
                        self.role == ParticipantRole::RELAY ||
                        self.role == ParticipantRole::L1_ENDPOINT ||
                        self.role == ParticipantRole::L2_ENDPOINT;
  if (needs_qn && cfg_.kind != NodeKind::QN)
    throw Error(Errc::RoleKindMismatch,
                std::string(role_name(self.role)) + " requires a quantum node");
  if (self.role == ParticipantRole::RECEIVER && cfg_.kind != NodeKind::CN)
    throw Error(Errc::RoleKindMismatch, "RECEIVER requires a classical node");
  if (!self.app.empty() && !hosted(cfg_.hosted_apps, self.app))
    throw Error(Errc::UnknownApplication,
                "application '" + self.app + "' is not hosted on '" + cfg_.node_id + "'");
  if (needs_qn) {
    try {
      factory_->kms(self.kms_endpoint)->ping();
    } catch (const Error& e) {
      throw Error(Errc::LocalKmsUnavailable,
                  "KMS '" + self.kms_id + "' did not answer", e.code());
    }
  }

  std::lock_guard lock(mu_);
  if (policies_.count(policy.session_id))
    throw Error(Errc::DuplicateSession,
                "session '" + policy.session_id + "' already installed");
  policies_[policy.session_id] = policy;
}

void Vkms::remove_policy(const std::string& session_id) {
  purge_session(session_id);
}

bool Vkms::has_policy(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return policies_.count(session_id) > 0;
}

bool Vkms::has_pending(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return pending_.count(session_id) > 0;
}

bool Vkms::has_delivered_key(const std::string& key_id) const {
  std::lock_guard lock(mu_);
  auto it = delivered_.find(key_id);
  return it != delivered_.end() && !it->second.delivered;
}

nlohmann::json Vkms::session_message(const std::string& session_id,
                                     const std::string& type,
                                     const nlohmann::json& body) {
  if (type == "abort") return handle_abort(session_id);
  SessionPolicy policy = policy_copy(session_id);
  const ParticipantPolicy& self = own_block(policy);
  try {
    if (type == "l1_deliver") return handle_l1_deliver(policy, self, body);
    if (type == "l2_notify") return handle_l2_notify(policy, self, body);
    if (type == "l3_start") return handle_l3_start(policy, self, body);
    if (type == "l3_offer") return handle_l3_offer(policy, self);
    if (type == "l3_run") return handle_l3_run(policy, self, body);
    if (type == "l3_relay") return handle_l3_relay(policy, self, body);
    if (type == "l4_start") return handle_l4_start(policy, self, body);
    if (type == "confirm") return handle_confirm(policy, self, body);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError,
                std::string("malformed '") + type + "' body: " + e.what());
  }
  throw Error(Errc::InvalidRequest, "unknown session message type '" + type + "'");
}

// --- responder-side handlers ---------------------------------------------

nlohmann::json Vkms::handle_l1_deliver(const SessionPolicy& policy,
                                       const ParticipantPolicy& self,
                                       const nlohmann::json& body) {
  if (self.role != ParticipantRole::L1_ENDPOINT || self.initiator)
    throw Error(Errc::InvalidRequest, "l1_deliver sent to a non-target participant");
  std::string key_id = str_field(body, "key_id");
  Bytes tag_i = bytes_field(body, "tag");

  auto kms = factory_->kms(self.kms_endpoint);
  KeyWithId kw = kms->get_key_with_id(self.app, {key_id}).at(0);
  KeyMaterial key = finish_direct_key(policy, "qkd", std::move(kw.key));

  if (!ct_equal(tag_i, confirm_tag(policy, key, "initiator")))
    throw Error(Errc::IntegrityCheckFailed,
                "key confirmation failed for session '" + policy.session_id + "'");
  Bytes tag_t = confirm_tag(policy, key, "target");
  store_delivered(policy, std::move(key));
  return json{{"tag", to_hex(tag_t)}};
}

nlohmann::json Vkms::handle_l2_notify(const SessionPolicy& policy,
                                      const ParticipantPolicy& self,
                                      const nlohmann::json& body) {
  if (self.role != ParticipantRole::L2_ENDPOINT || self.initiator)
    throw Error(Errc::InvalidRequest, "l2_notify sent to a non-target participant");
  std::string key_id = str_field(body, "key_id");
  Bytes tag_i = bytes_field(body, "tag");

  auto kms = factory_->kms(self.kms_endpoint);
  KeyWithId kw = kms->fetch_relayed(policy.session_id);
  if (kw.key_id != key_id)
    throw Error(Errc::IntegrityCheckFailed,
                "relayed key id does not match the announced id");
  KeyMaterial key = finish_direct_key(policy, "relay", std::move(kw.key));

  if (!ct_equal(tag_i, confirm_tag(policy, key, "initiator")))
    throw Error(Errc::IntegrityCheckFailed,
                "key confirmation failed for session '" + policy.session_id + "'");
  Bytes tag_t = confirm_tag(policy, key, "target");
  store_delivered(policy, std::move(key));
  return json{{"tag", to_hex(tag_t)}};
}

nlohmann::json Vkms::handle_l3_start(const SessionPolicy& policy,
                                     const ParticipantPolicy& self,
                                     const nlohmann::json& body) {
  if (self.role != ParticipantRole::PASSIVE)
    throw Error(Errc::InvalidRequest, "l3_start must be handled by the PASSIVE node");
  Bytes pk1 = bytes_field(body, "pk1");
  std::string pk_aux_hex = str_field(body, "pk_aux");

  KemSuiteId suite = self.kem_suites.at(0);
  KemEncapsulation e1 = kem_encapsulate(suite, pk1, *rng_);
  KeyWithId qk = fetch_fresh_qkd_key(self, self.app);

  const PeerRef& relay = self.peers.at("RELAY");
  json relay_reply = factory_->vkms(relay.endpoint)
                         ->session_message(policy.session_id, "l3_relay",
                                           json{{"qk_id", qk.key_id},
                                                {"pk_aux", pk_aux_hex}});

  std::vector<SecretInput> inputs;
  for (const auto& label : self.kdf_recipe) {
    if (label == "kem1")
      inputs.push_back({label, e1.shared_secret});
    else if (label == "qkd")
      inputs.push_back({label, qk.key});
    else
      throw Error(Errc::Internal, "unsupported kdf label '" + label + "'");
  }
  KeyMaterial key = kdf_combine(inputs, ctx_for(policy, policy.out_len_bits));

  {
    std::lock_guard lock(mu_);
    PendingSession p;
    p.key = std::move(key);
    pending_[policy.session_id] = std::move(p);
  }
  return json{{"ct1", to_hex(e1.ciphertext)},
              {"qk_id", qk.key_id},
              {"ct_aux", relay_reply.at("ct_aux")},
              {"enc", relay_reply.at("enc")},
              {"relay_tag", relay_reply.at("tag")}};
}

nlohmann::json Vkms::handle_l3_offer(const SessionPolicy& policy,
                                     const ParticipantPolicy& self) {
  if (self.role != ParticipantRole::RECEIVER)
    throw Error(Errc::InvalidRequest, "l3_offer must be handled by the RECEIVER node");
  KemSuiteId suite = self.kem_suites.at(0);
  KemKeyPair kp1 = kem_keygen(suite, *rng_);
  KemKeyPair kp_aux = kem_keygen(suite, *rng_);
  {
    std::lock_guard lock(mu_);
    PendingSession p;
    p.sk1 = std::move(kp1.secret_key);
    p.sk_aux = std::move(kp_aux.secret_key);
    pending_[policy.session_id] = std::move(p);
  }
  return json{{"pk1", to_hex(kp1.public_key)}, {"pk_aux", to_hex(kp_aux.public_key)}};
}

nlohmann::json Vkms::handle_l3_run(const SessionPolicy& policy,
                                   const ParticipantPolicy& self,
                                   const nlohmann::json& body) {
  if (self.role != ParticipantRole::RECEIVER)
    throw Error(Errc::InvalidRequest, "l3_run must be handled by the RECEIVER node");
  Bytes ct1 = bytes_field(body, "ct1");
  std::string qk_id = str_field(body, "qk_id");
  Bytes ct_aux = bytes_field(body, "ct_aux");
  Bytes enc = bytes_field(body, "enc");
  Bytes relay_tag = bytes_field(body, "relay_tag");
  Bytes tag_i = bytes_field(body, "tag");

  Bytes sk1, sk_aux;
  {
    std::lock_guard lock(mu_);
    auto it = pending_.find(policy.session_id);
    if (it == pending_.end() || it->second.sk1.empty())
      throw Error(Errc::InvalidRequest,
                  "l3_run without a pending l3_offer for session '" +
                      policy.session_id + "'");
    sk1 = std::move(it->second.sk1);
    sk_aux = std::move(it->second.sk_aux);
    pending_.erase(it);
  }

  KemSuiteId suite = self.kem_suites.at(0);
  try {
    KeyMaterial ss1 = kem_decapsulate(suite, sk1, ct1);
    KeyMaterial aux = kem_decapsulate(suite, sk_aux, ct_aux);
    if (!ct_equal(relay_tag, relay_leg_tag(policy, aux, qk_id, ct_aux, enc)))
      throw Error(Errc::IntegrityCheckFailed,
                  "relay leg authentication failed for session '" +
                      policy.session_id + "'");
    KeyMaterial qk(xor_bytes(enc, relay_leg_pad(policy, aux, enc.size()).view()));

    std::vector<SecretInput> inputs;
    for (const auto& label : self.kdf_recipe) {
      if (label == "kem1")
        inputs.push_back({label, ss1});
      else if (label == "qkd")
        inputs.push_back({label, qk});
      else
        throw Error(Errc::Internal, "unsupported kdf label '" + label + "'");
    }
    KeyMaterial key = kdf_combine(inputs, ctx_for(policy, policy.out_len_bits));

    if (!ct_equal(tag_i, confirm_tag(policy, key, "initiator")))
      throw Error(Errc::IntegrityCheckFailed,
                  "key confirmation failed for session '" + policy.session_id + "'");
    Bytes tag_t = confirm_tag(policy, key, "target");
    store_delivered(policy, std::move(key));
    wipe_secrets(sk1, sk_aux);
    return json{{"tag", to_hex(tag_t)}};
  } catch (...) {
    wipe_secrets(sk1, sk_aux);
    throw;
  }
}

nlohmann::json Vkms::handle_l3_relay(const SessionPolicy& policy,
                                     const ParticipantPolicy& self,
                                     const nlohmann::json& body) {
  if (self.role != ParticipantRole::RELAY)
    throw Error(Errc::InvalidRequest, "l3_relay must be handled by the RELAY node");
  std::string qk_id = str_field(body, "qk_id");
  Bytes pk_aux = bytes_field(body, "pk_aux");

  auto kms = factory_->kms(self.kms_endpoint);
  KeyWithId qk = kms->get_key_with_id(cfg_.node_id, {qk_id}).at(0);

  KemSuiteId suite = self.kem_suites.at(0);
  KemEncapsulation ea = kem_encapsulate(suite, pk_aux, *rng_);
  KeyMaterial pad = relay_leg_pad(policy, ea.shared_secret, qk.key.size());
  Bytes enc = xor_bytes(qk.key.view(), pad.view());
  Bytes tag = relay_leg_tag(policy, ea.shared_secret, qk_id, ea.ciphertext, enc);
  return json{{"ct_aux", to_hex(ea.ciphertext)},
              {"enc", to_hex(enc)},
              {"tag", to_hex(tag)}};
}

nlohmann::json Vkms::handle_l4_start(const SessionPolicy& policy,
                                     const ParticipantPolicy& self,
                                     const nlohmann::json& body) {
  if (self.role != ParticipantRole::ENDPOINT || self.initiator)
    throw Error(Errc::InvalidRequest, "l4_start sent to a non-target participant");
  Bytes pk1 = bytes_field(body, "pk1");

  KemEncapsulation e1 = kem_encapsulate(self.kem_suites.at(0), pk1, *rng_);
  json reply{{"ct1", to_hex(e1.ciphertext)}};

  std::vector<SecretInput> inputs;
  KemEncapsulation e2;
  if (policy.dual_kem) {
    Bytes pk2 = bytes_field(body, "pk2");
    e2 = kem_encapsulate(self.kem_suites.at(1), pk2, *rng_);
    reply["ct2"] = to_hex(e2.ciphertext);
  }
  for (const auto& label : self.kdf_recipe) {
    if (label == "kem1")
      inputs.push_back({label, e1.shared_secret});
    else if (label == "kem2")
      inputs.push_back({label, e2.shared_secret});
    else
      throw Error(Errc::Internal, "unsupported kdf label '" + label + "'");
  }
  KeyMaterial key = kdf_combine(inputs, ctx_for(policy, policy.out_len_bits));
  {
    std::lock_guard lock(mu_);
    PendingSession p;
    p.key = std::move(key);
    pending_[policy.session_id] = std::move(p);
  }
  return reply;
}

nlohmann::json Vkms::handle_confirm(const SessionPolicy& policy,
                                    const ParticipantPolicy& self,
                                    const nlohmann::json& body) {
  (void)self;
  Bytes tag_i = bytes_field(body, "tag");
  KeyMaterial key;
  {
    std::lock_guard lock(mu_);
    auto it = pending_.find(policy.session_id);
    if (it == pending_.end() || it->second.key.empty())
      throw Error(Errc::InvalidRequest,
                  "confirm without a pending key for session '" + policy.session_id + "'");
    key = std::move(it->second.key);
    pending_.erase(it);
  }
  if (!ct_equal(tag_i, confirm_tag(policy, key, "initiator"))) {
    purge_session(policy.session_id);
    throw Error(Errc::IntegrityCheckFailed,
                "key confirmation failed for session '" + policy.session_id + "'");
  }
  Bytes tag_t = confirm_tag(policy, key, "target");
  store_delivered(policy, std::move(key));
  return json{{"tag", to_hex(tag_t)}};
}

nlohmann::json Vkms::handle_abort(const std::string& session_id) {
  purge_session(session_id);
  return json::object();
}

// --- initiator-side engines ----------------------------------------------

KeyMaterial Vkms::run_level1(const SessionPolicy& policy,
                             const ParticipantPolicy& self) {
  KeyWithId kw = fetch_fresh_qkd_key(self, self.app);
  KeyMaterial key = finish_direct_key(policy, "qkd", std::move(kw.key));

  const PeerRef& peer = self.peers.at("PEER");
  json reply = factory_->vkms(peer.endpoint)
                   ->session_message(policy.session_id, "l1_deliver",
                                     json{{"key_id", kw.key_id},
                                          {"tag", to_hex(confirm_tag(policy, key,
                                                                     "initiator"))}});
  if (!ct_equal(bytes_field(reply, "tag"), confirm_tag(policy, key, "target")))
    throw Error(Errc::IntegrityCheckFailed,
                "peer key confirmation failed for session '" + policy.session_id + "'");
  return key;
}

KeyMaterial Vkms::run_level2(const SessionPolicy& policy,
                             const ParticipantPolicy& self) {
  const RelayRule* entry = nullptr;
  for (const auto& rule : policy.relay_rules) {
    if (rule.kms_id == self.kms_id && rule.upstream.empty()) entry = &rule;
  }
  if (!entry)
    throw Error(Errc::ValidationError,
                "no entry relay rule for KMS '" + self.kms_id + "'");

  auto kms = factory_->kms(self.kms_endpoint);
  KmsStatus st = kms->status(entry->link_out);
  KeyMaterial seed(rng_->bytes(st.key_size_bits / 8));
  std::string transport_id = uuid_from_bytes(rng_->bytes(16));

  RelayEnvelope env;
  env.session_id = policy.session_id;
  env.key_id = transport_id;
  env.payload = seed.bytes();
  kms->forward_relayed_key(env);
  secure_wipe(env.payload);

  KeyMaterial key = finish_direct_key(policy, "relay", std::move(seed));

  const PeerRef& peer = self.peers.at("PEER");
  json reply = factory_->vkms(peer.endpoint)
                   ->session_message(policy.session_id, "l2_notify",
                                     json{{"key_id", transport_id},
                                          {"tag", to_hex(confirm_tag(policy, key,
                                                                     "initiator"))}});
  if (!ct_equal(bytes_field(reply, "tag"), confirm_tag(policy, key, "target")))
    throw Error(Errc::IntegrityCheckFailed,
                "peer key confirmation failed for session '" + policy.session_id + "'");
  return key;
}

KeyMaterial Vkms::run_level3(const SessionPolicy& policy,
                             const ParticipantPolicy& self) {
  KemSuiteId suite = self.kem_suites.at(0);

  if (self.role == ParticipantRole::RECEIVER) {
    // Receiver-driven: generate both keypairs, let the passive side drive the
    // relay leg, then confirm.
    KemKeyPair kp1 = kem_keygen(suite, *rng_);
    KemKeyPair kp_aux = kem_keygen(suite, *rng_);
    const PeerRef& passive = self.peers.at("PASSIVE");
    auto passive_vkms = factory_->vkms(passive.endpoint);

    json reply;
    KeyMaterial ss1, aux;
    try {
      reply = passive_vkms->session_message(policy.session_id, "l3_start",
                                            json{{"pk1", to_hex(kp1.public_key)},
                                                 {"pk_aux", to_hex(kp_aux.public_key)}});
      ss1 = kem_decapsulate(suite, kp1.secret_key, bytes_field(reply, "ct1"));
      aux = kem_decapsulate(suite, kp_aux.secret_key, bytes_field(reply, "ct_aux"));
    } catch (...) {
      wipe_secrets(kp1.secret_key, kp_aux.secret_key);
      throw;
    }
    wipe_secrets(kp1.secret_key, kp_aux.secret_key);

    std::string qk_id = str_field(reply, "qk_id");
    Bytes ct_aux = bytes_field(reply, "ct_aux");
    Bytes enc = bytes_field(reply, "enc");
    if (!ct_equal(bytes_field(reply, "relay_tag"),
                  relay_leg_tag(policy, aux, qk_id, ct_aux, enc)))
      throw Error(Errc::IntegrityCheckFailed,
                  "relay leg authentication failed for session '" +
                      policy.session_id + "'");
    KeyMaterial qk(xor_bytes(enc, relay_leg_pad(policy, aux, enc.size()).view()));

    std::vector<SecretInput> inputs;
    for (const auto& label : self.kdf_recipe) {
      if (label == "kem1")
        inputs.push_back({label, ss1});
      else if (label == "qkd")
        inputs.push_back({label, qk});
      else
        throw Error(Errc::Internal, "unsupported kdf label '" + label + "'");
    }
    KeyMaterial key = kdf_combine(inputs, ctx_for(policy, policy.out_len_bits));

    json conf = passive_vkms->session_message(
        policy.session_id, "confirm",
        json{{"tag", to_hex(confirm_tag(policy, key, "initiator"))}});
    if (!ct_equal(bytes_field(conf, "tag"), confirm_tag(policy, key, "target")))
      throw Error(Errc::IntegrityCheckFailed,
                  "peer key confirmation failed for session '" + policy.session_id + "'");
    return key;
  }

  // Passive-driven: ask the receiver for keypairs, encapsulate, have the
  // relay wrap the QKD key, then deliver everything in one l3_run.
  const PeerRef& receiver = self.peers.at("RECEIVER");
  const PeerRef& relay = self.peers.at("RELAY");
  auto receiver_vkms = factory_->vkms(receiver.endpoint);

  json offer = receiver_vkms->session_message(policy.session_id, "l3_offer",
                                              json::object());
  KemEncapsulation e1 = kem_encapsulate(suite, bytes_field(offer, "pk1"), *rng_);
  KeyWithId qk = fetch_fresh_qkd_key(self, self.app);

  json relay_reply = factory_->vkms(relay.endpoint)
                         ->session_message(policy.session_id, "l3_relay",
                                           json{{"qk_id", qk.key_id},
                                                {"pk_aux", offer.at("pk_aux")}});

  std::vector<SecretInput> inputs;
  for (const auto& label : self.kdf_recipe) {
    if (label == "kem1")
      inputs.push_back({label, e1.shared_secret});
    else if (label == "qkd")
      inputs.push_back({label, qk.key});
    else
      throw Error(Errc::Internal, "unsupported kdf label '" + label + "'");
  }
  KeyMaterial key = kdf_combine(inputs, ctx_for(policy, policy.out_len_bits));

  json run = receiver_vkms->session_message(
      policy.session_id, "l3_run",
      json{{"ct1", to_hex(e1.ciphertext)},
           {"qk_id", qk.key_id},
           {"ct_aux", relay_reply.at("ct_aux")},
           {"enc", relay_reply.at("enc")},
           {"relay_tag", relay_reply.at("tag")},
           {"tag", to_hex(confirm_tag(policy, key, "initiator"))}});
  if (!ct_equal(bytes_field(run, "tag"), confirm_tag(policy, key, "target")))
    throw Error(Errc::IntegrityCheckFailed,
                "peer key confirmation failed for session '" + policy.session_id + "'");
  return key;
}

KeyMaterial Vkms::run_level4(const SessionPolicy& policy,
                             const ParticipantPolicy& self) {
  KemKeyPair kp1 = kem_keygen(self.kem_suites.at(0), *rng_);
  KemKeyPair kp2;
  json start{{"pk1", to_hex(kp1.public_key)}};
  if (policy.dual_kem) {
    kp2 = kem_keygen(self.kem_suites.at(1), *rng_);
    start["pk2"] = to_hex(kp2.public_key);
  }

  const PeerRef& peer = self.peers.at("PEER");
  auto peer_vkms = factory_->vkms(peer.endpoint);

  KeyMaterial ss1, ss2;
  try {
    json reply = peer_vkms->session_message(policy.session_id, "l4_start", start);
    ss1 = kem_decapsulate(self.kem_suites.at(0), kp1.secret_key,
                          bytes_field(reply, "ct1"));
    if (policy.dual_kem)
      ss2 = kem_decapsulate(self.kem_suites.at(1), kp2.secret_key,
                            bytes_field(reply, "ct2"));
  } catch (...) {
    wipe_secrets(kp1.secret_key, kp2.secret_key);
    throw;
  }
  wipe_secrets(kp1.secret_key, kp2.secret_key);

  std::vector<SecretInput> inputs;
  for (const auto& label : self.kdf_recipe) {
    if (label == "kem1")
      inputs.push_back({label, ss1});
    else if (label == "kem2")
      inputs.push_back({label, ss2});
    else
      throw Error(Errc::Internal, "unsupported kdf label '" + label + "'");
  }
  KeyMaterial key = kdf_combine(inputs, ctx_for(policy, policy.out_len_bits));

  json conf = peer_vkms->session_message(
      policy.session_id, "confirm",
      json{{"tag", to_hex(confirm_tag(policy, key, "initiator"))}});
  if (!ct_equal(bytes_field(conf, "tag"), confirm_tag(policy, key, "target")))
    throw Error(Errc::IntegrityCheckFailed,
                "peer key confirmation failed for session '" + policy.session_id + "'");
  return key;
}

// --- application plane ----------------------------------------------------

AppKeyResult Vkms::app_get_key(const std::string& initiator_app,
                               const std::string& target_app,
                               std::size_t size_bits) {
  if (!hosted(cfg_.hosted_apps, initiator_app))
    throw Error(Errc::WrongCaller,
                "application '" + initiator_app + "' is not hosted on '" +
                    cfg_.node_id + "'");
  auto qusec = factory_->qusec(cfg_.qusec_endpoint);
  using clock = std::chrono::steady_clock;

  auto t0 = clock::now();
  SecurityLevel level = qusec->security_level_request(initiator_app, target_app);
  auto t1 = clock::now();

  SessionPolicy policy =
      qusec->configuration_request(initiator_app, target_app, level, size_bits);
  auto t2 = clock::now();

  const ParticipantPolicy& self = own_block(policy);
  KeyMaterial key;
  try {
    switch (policy.level) {
      case SecurityLevel::L1: key = run_level1(policy, self); break;
      case SecurityLevel::L2: key = run_level2(policy, self); break;
      case SecurityLevel::L3: key = run_level3(policy, self); break;
      case SecurityLevel::L4: key = run_level4(policy, self); break;
    }
  } catch (const Error& e) {
    abort_peers(policy);
    purge_session(policy.session_id);
    if (e.code() == Errc::DerivationFailed) throw;
    throw Error(Errc::DerivationFailed,
                "session '" + policy.session_id + "' failed during derivation",
                e.code());
  }
  auto t3 = clock::now();

  try {
    qusec->report_derived(policy.session_id, policy.session_key_id);
  } catch (const Error& e) {
    abort_peers(policy);
    purge_session(policy.session_id);
    throw Error(Errc::DerivationFailed,
                "session '" + policy.session_id + "' could not be reported",
                e.code());
  }
  auto t4 = clock::now();

  AppKeyResult result;
  result.key_id = policy.session_key_id;
  result.key = std::move(key);
  result.level = policy.level;
  result.timings =
      PhaseTimings{policy.session_id, policy.level,       Side::INITIATOR,
                   ms_between(t0, t1), ms_between(t1, t2), ms_between(t2, t3),
                   ms_between(t3, t4), ms_between(t0, t4)};
  return result;
}

AppKeyResult Vkms::app_get_key_with_id(const std::string& caller_app,
                                       const std::string& key_id) {
  if (!hosted(cfg_.hosted_apps, caller_app))
    throw Error(Errc::WrongCaller, "application '" + caller_app +
                                       "' is not hosted on '" + cfg_.node_id + "'");
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();

  KeyMaterial key;
  SecurityLevel level = SecurityLevel::L4;
  {
    std::lock_guard lock(mu_);
    auto it = delivered_.find(key_id);
    if (it == delivered_.end())
      throw Error(Errc::UnknownKeyId, "no delivered key '" + key_id + "'");
    if (it->second.delivered)
      throw Error(Errc::AlreadyDelivered,
                  "key '" + key_id + "' was already handed out");
    if (it->second.target_app != caller_app)
      throw Error(Errc::WrongCaller, "key '" + key_id + "' does not belong to '" +
                                         caller_app + "'");
    key = it->second.key;
    level = it->second.level;
  }

  SessionLookup lookup =
      factory_->qusec(cfg_.qusec_endpoint)->session_lookup(caller_app, key_id);

  std::lock_guard lock(mu_);
  auto it = delivered_.find(key_id);
  if (it == delivered_.end())
    throw Error(Errc::UnknownKeyId, "key '" + key_id + "' was purged");
  it->second.delivered = true;
  it->second.key.wipe();
  auto t1 = clock::now();

  AppKeyResult result;
  result.key_id = key_id;
  result.key = std::move(key);
  result.level = level;
  result.timings = PhaseTimings{lookup.session_id, level, Side::TARGET, 0.0, 0.0,
                                0.0, ms_between(t0, t1), ms_between(t0, t1)};
  return result;
}

}  // namespace qsnet
