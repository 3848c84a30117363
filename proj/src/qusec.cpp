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

#include "qsnet/qusec.hpp"

#include <algorithm>

#include "qsnet/errors.hpp"

namespace qsnet {

namespace {

std::string first_kms_id(const NodeDescriptor& n) {
  return n.kms_ids.empty() ? "" : n.kms_ids.front();
}

std::string first_kms_endpoint(const NodeDescriptor& n) {
  return n.kms_endpoints.empty() ? "" : n.kms_endpoints.front();
}

std::string app_at(const NodeDescriptor& node, const std::string& a,
                   const std::string& b) {
  for (const auto& app : node.hosted_apps) {
    if (app == a || app == b) return app;
  }
  return "";
}

}  // namespace

const char* session_state_name(SessionState s) {
  switch (s) {
    case SessionState::CONFIGURED: return "CONFIGURED";
    case SessionState::DERIVED: return "DERIVED";
    case SessionState::DELIVERED_BOTH: return "DELIVERED_BOTH";
  }
  return "?";
}

Qusec::Qusec(std::shared_ptr<ClientFactory> factory, QusecConfig cfg,
             std::shared_ptr<RandomSource> rng)
    : factory_(std::move(factory)), cfg_(cfg), rng_(std::move(rng)) {
  if (!rng_) rng_ = std::shared_ptr<RandomSource>(&SystemRandom::instance(),
                                                  [](RandomSource*) {});
}

void Qusec::register_node(const NodeDescriptor& node) {
  std::lock_guard lock(mu_);
  topology_.add_node(node);
}

void Qusec::register_link(const QkdLinkInfo& link) {
  std::lock_guard lock(mu_);
  topology_.add_link(link);
}

Qusec::PairNodes Qusec::resolve_pair(const std::string& src_app,
                                     const std::string& dst_app) const {
  const NodeDescriptor* src = topology_.node_of_app(src_app);
  if (!src) throw Error(Errc::UnknownApplication, "unknown application '" + src_app + "'");
  const NodeDescriptor* dst = topology_.node_of_app(dst_app);
  if (!dst) throw Error(Errc::UnknownApplication, "unknown application '" + dst_app + "'");
  if (src_app == dst_app)
    throw Error(Errc::InvalidRequest, "source and destination application are the same");
  if (src->node_id == dst->node_id)
    throw Error(Errc::InvalidRequest,
                "applications '" + src_app + "' and '" + dst_app +
                    "' are hosted on the same node");
  return {src, dst};
}

SecurityLevel Qusec::assign_locked(const std::string& src_app,
                                   const std::string& dst_app) const {
  PairNodes pair = resolve_pair(src_app, dst_app);
  const bool src_qn = pair.src->kind == NodeKind::QN;
  const bool dst_qn = pair.dst->kind == NodeKind::QN;

  if (src_qn && dst_qn) {
    if (topology_.link_between(pair.src->node_id, pair.dst->node_id))
      return SecurityLevel::L1;
    if (!topology_.shortest_path(pair.src->node_id, pair.dst->node_id).empty())
      return SecurityLevel::L2;
    return SecurityLevel::L4;  // disconnected quantum plane
  }
  if (src_qn != dst_qn) {
    const NodeDescriptor* qn = src_qn ? pair.src : pair.dst;
    if (!topology_.neighbors(qn->node_id).empty()) return SecurityLevel::L3;
  }
  return SecurityLevel::L4;
}

SecurityLevel Qusec::assign_security_level(const std::string& src_app,
                                           const std::string& dst_app) {
  ++level_requests_;
  std::lock_guard lock(mu_);
  return assign_locked(src_app, dst_app);
}

std::vector<std::string> Qusec::compute_relay_path(const std::string& src_node,
                                                   const std::string& dst_node) {
  std::lock_guard lock(mu_);
  const NodeDescriptor& a = topology_.node(src_node);
  const NodeDescriptor& b = topology_.node(dst_node);
  if (a.kind != NodeKind::QN || b.kind != NodeKind::QN)
    throw Error(Errc::NoQuantumPath, "both path endpoints must be QN nodes");
  auto path = topology_.shortest_path(src_node, dst_node);
  if (path.empty())
    throw Error(Errc::NoQuantumPath,
                "no quantum path between '" + src_node + "' and '" + dst_node + "'");
  return path;
}

std::string Qusec::relay_for(const std::string& passive_node) const {
  auto nbs = topology_.neighbors(passive_node);
  if (nbs.empty())
    throw Error(Errc::InfeasibleLevel,
                "no relay QN adjacent to '" + passive_node + "'");
  return nbs.front();
}

std::string Qusec::mint_uuid() {
  return uuid_from_bytes(rng_->bytes(16));
}

SessionPolicy Qusec::compute_policy(const std::string& session_id,
                                    const std::string& src_app,
                                    const std::string& dst_app, SecurityLevel level,
                                    std::size_t out_len_bits) {
  std::lock_guard lock(mu_);
  return compute_policy_locked(session_id, mint_uuid(), src_app, dst_app, level,
                               out_len_bits);
}

SessionPolicy Qusec::compute_policy_locked(const std::string& session_id,
                                           const std::string& session_key_id,
                                           const std::string& src_app,
                                           const std::string& dst_app,
                                           SecurityLevel level,
                                           std::size_t out_len_bits) const {
  PairNodes pair = resolve_pair(src_app, dst_app);
  if (assign_locked(src_app, dst_app) != level)
    throw Error(Errc::InfeasibleLevel,
                std::string(level_name(level)) + " is not the feasible level for (" +
                    src_app + ", " + dst_app + ")");

  SessionPolicy policy;
  policy.session_id = session_id;
  policy.session_key_id = session_key_id;
  policy.level = level;
  policy.initiator_app = src_app;
  policy.target_app = dst_app;
  policy.out_len_bits = out_len_bits;
  policy.dual_kem = cfg_.dual_kem;

  auto peer_ref = [&](const NodeDescriptor& n) {
    return PeerRef{n.node_id, app_at(n, src_app, dst_app), n.vkms_endpoint};
  };
  auto base_block = [&](const NodeDescriptor& n, ParticipantRole role) {
    ParticipantPolicy p;
    p.node_id = n.node_id;
    p.role = role;
    p.app = app_at(n, src_app, dst_app);
    p.vkms_endpoint = n.vkms_endpoint;
    p.initiator = (p.app == src_app) && !p.app.empty();
    p.kms_id = first_kms_id(n);
    p.kms_endpoint = first_kms_endpoint(n);
    return p;
  };

  switch (level) {
    case SecurityLevel::L1: {
      const QkdLinkInfo* link =
          topology_.link_between(pair.src->node_id, pair.dst->node_id);
      if (!link) throw Error(Errc::InfeasibleLevel, "direct link vanished");
      for (const NodeDescriptor* n : {pair.src, pair.dst}) {
        const NodeDescriptor* other = (n == pair.src) ? pair.dst : pair.src;
        ParticipantPolicy p = base_block(*n, ParticipantRole::L1_ENDPOINT);
        p.link_id = link->link_id;
        p.peers["PEER"] = peer_ref(*other);
        policy.participants.push_back(std::move(p));
      }
      break;
    }
    case SecurityLevel::L2: {
      auto path = topology_.shortest_path(pair.src->node_id, pair.dst->node_id);
      if (path.size() < 2) throw Error(Errc::InfeasibleLevel, "quantum path vanished");
      for (const NodeDescriptor* n : {pair.src, pair.dst}) {
        const NodeDescriptor* other = (n == pair.src) ? pair.dst : pair.src;
        ParticipantPolicy p = base_block(*n, ParticipantRole::L2_ENDPOINT);
        p.relay_path = path;
        p.peers["PEER"] = peer_ref(*other);
        policy.participants.push_back(std::move(p));
      }
      for (std::size_t i = 0; i < path.size(); ++i) {
        const NodeDescriptor& hop = topology_.node(path[i]);
        RelayRule rule;
        rule.session_id = session_id;
        rule.kms_id = first_kms_id(hop);
        rule.kms_endpoint = first_kms_endpoint(hop);
        if (i > 0) {
          rule.upstream = path[i - 1];
          rule.link_in = topology_.link_between(path[i - 1], path[i])->link_id;
        }
        if (i + 1 < path.size()) {
          rule.downstream = path[i + 1];
          rule.link_out = topology_.link_between(path[i], path[i + 1])->link_id;
          rule.downstream_endpoint = first_kms_endpoint(topology_.node(path[i + 1]));
        }
        policy.relay_rules.push_back(std::move(rule));
      }
      break;
    }
    case SecurityLevel::L3: {
      const NodeDescriptor* cn = pair.src->kind == NodeKind::CN ? pair.src : pair.dst;
      const NodeDescriptor* qn = pair.src->kind == NodeKind::QN ? pair.src : pair.dst;
      if (cn->kind != NodeKind::CN || qn->kind != NodeKind::QN)
        throw Error(Errc::InfeasibleLevel, "pair is not one CN and one QN");
      const NodeDescriptor& relay = topology_.node(relay_for(qn->node_id));
      const QkdLinkInfo* link = topology_.link_between(qn->node_id, relay.node_id);

      ParticipantPolicy receiver = base_block(*cn, ParticipantRole::RECEIVER);
      receiver.kem_suites = {cfg_.kem_suite};
      receiver.kdf_recipe = {"kem1", "qkd"};
      receiver.peers["PASSIVE"] = peer_ref(*qn);
      receiver.peers["RELAY"] = PeerRef{relay.node_id, "", relay.vkms_endpoint};

      ParticipantPolicy passive = base_block(*qn, ParticipantRole::PASSIVE);
      passive.kem_suites = {cfg_.kem_suite};
      passive.kdf_recipe = {"kem1", "qkd"};
      passive.link_id = link->link_id;
      passive.peers["RECEIVER"] = peer_ref(*cn);
      passive.peers["RELAY"] = PeerRef{relay.node_id, "", relay.vkms_endpoint};

      ParticipantPolicy relay_block = base_block(relay, ParticipantRole::RELAY);
      relay_block.app = "";
      relay_block.initiator = false;
      relay_block.kem_suites = {cfg_.kem_suite};
      relay_block.link_id = link->link_id;
      relay_block.peers["RECEIVER"] = peer_ref(*cn);
      relay_block.peers["PASSIVE"] = peer_ref(*qn);

      policy.participants = {std::move(receiver), std::move(passive),
                             std::move(relay_block)};
      break;
    }
    case SecurityLevel::L4: {
      for (const NodeDescriptor* n : {pair.src, pair.dst}) {
        const NodeDescriptor* other = (n == pair.src) ? pair.dst : pair.src;
        ParticipantPolicy p = base_block(*n, ParticipantRole::ENDPOINT);
        p.kem_suites = policy.dual_kem
                           ? std::vector<KemSuiteId>{cfg_.kem_suite, cfg_.kem_suite}
                           : std::vector<KemSuiteId>{cfg_.kem_suite};
        p.kdf_recipe = policy.dual_kem ? std::vector<std::string>{"kem1", "kem2"}
                                       : std::vector<std::string>{"kem1"};
        p.peers["PEER"] = peer_ref(*other);
        policy.participants.push_back(std::move(p));
      }
      break;
    }
  }

  validate_policy(policy);
  return policy;
}

void Qusec::distribute_policy(const SessionPolicy& policy) {
  struct Installed {
    enum Kind { VKMS, KMS } kind;
    std::string endpoint;
  };
  std::vector<Installed> done;
  try {
    for (const auto& p : policy.participants) {
      factory_->vkms(p.vkms_endpoint)->install_policy(policy);
      done.push_back({Installed::VKMS, p.vkms_endpoint});
    }
    for (const auto& rule : policy.relay_rules) {
      factory_->kms(rule.kms_endpoint)->install_relay_rule(rule);
      done.push_back({Installed::KMS, rule.kms_endpoint});
    }
  } catch (const Error& e) {
    for (const auto& d : done) {
      try {
        if (d.kind == Installed::VKMS)
          factory_->vkms(d.endpoint)->remove_policy(policy.session_id);
        else
          factory_->kms(d.endpoint)->remove_relay_rule(policy.session_id);
      } catch (...) {
        // Rollback is best effort; the participant may be the dead one.
      }
    }
    throw Error(Errc::ParticipantUnreachable,
                "policy distribution for session '" + policy.session_id + "' failed",
                e.code());
  }
}

SessionPolicy Qusec::configuration_request(const std::string& src_app,
                                           const std::string& dst_app,
                                           SecurityLevel level,
                                           std::size_t out_len_bits) {
  ++config_requests_;
  if (out_len_bits == 0 || out_len_bits % 8 != 0)
    throw Error(Errc::InvalidRequest, "out_len_bits must be a positive multiple of 8");
  SessionPolicy policy;
  {
    std::lock_guard lock(mu_);
    sweep_expired_locked();
    std::string session_id = "s-" + mint_uuid();
    policy = compute_policy_locked(session_id, mint_uuid(), src_app, dst_app, level,
                                   out_len_bits);
  }
  distribute_policy(policy);
  {
    std::lock_guard lock(mu_);
    SessionRecord rec;
    rec.session_id = policy.session_id;
    rec.initiator_app = src_app;
    rec.target_app = dst_app;
    rec.level = level;
    rec.derived_key_id = policy.session_key_id;
    rec.state = SessionState::CONFIGURED;
    rec.touched = std::chrono::steady_clock::now();
    sessions_[rec.session_id] = rec;
    key_to_session_[policy.session_key_id] = rec.session_id;
  }
  return policy;
}

SessionLookup Qusec::lookup_session_for_target(const std::string& target_app,
                                               const std::string& key_id) {
  ++session_lookups_;
  std::lock_guard lock(mu_);
  sweep_expired_locked();
  auto kit = key_to_session_.find(key_id);
  if (kit == key_to_session_.end())
    throw Error(Errc::UnknownSession, "no session for key id '" + key_id + "'");
  SessionRecord& rec = sessions_.at(kit->second);
  if (rec.target_app != target_app)
    throw Error(Errc::WrongCaller,
                "'" + target_app + "' is not the target of session '" +
                    rec.session_id + "'");
  if (rec.state == SessionState::CONFIGURED)
    throw Error(Errc::NotYetDerived,
                "session '" + rec.session_id + "' has no derived key yet");
  if (rec.state == SessionState::DERIVED) rec.state = SessionState::DELIVERED_BOTH;
  rec.touched = std::chrono::steady_clock::now();
  return SessionLookup{rec.session_id, rec.level, rec.initiator_app, rec.target_app,
                       session_state_name(rec.state)};
}

void Qusec::report_derived(const std::string& session_id, const std::string& key_id) {
  ++derived_reports_;
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end())
    throw Error(Errc::UnknownSession, "unknown session '" + session_id + "'");
  SessionRecord& rec = it->second;
  if (rec.derived_key_id != key_id)
    throw Error(Errc::KeyMismatch,
                "reported key id does not match session '" + session_id + "'");
  if (rec.state == SessionState::CONFIGURED) rec.state = SessionState::DERIVED;
  rec.touched = std::chrono::steady_clock::now();
}

QusecStats Qusec::stats() const {
  return QusecStats{level_requests_.load(), config_requests_.load(),
                    session_lookups_.load(), derived_reports_.load()};
}

SessionRecord Qusec::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end())
    throw Error(Errc::UnknownSession, "unknown session '" + session_id + "'");
  return it->second;
}

void Qusec::sweep_expired_locked() {
  auto now = std::chrono::steady_clock::now();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.touched > cfg_.session_ttl) {
      key_to_session_.erase(it->second.derived_key_id);
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace qsnet
