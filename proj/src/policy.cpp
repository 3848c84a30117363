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

#include "qsnet/policy.hpp"

#include <algorithm>

#include "qsnet/errors.hpp"

namespace qsnet {

const char* role_name(ParticipantRole r) {
  switch (r) {
    case ParticipantRole::RECEIVER: return "RECEIVER";
    case ParticipantRole::PASSIVE: return "PASSIVE";
    case ParticipantRole::RELAY: return "RELAY";
    case ParticipantRole::ENDPOINT: return "ENDPOINT";
    case ParticipantRole::L1_ENDPOINT: return "L1_ENDPOINT";
    case ParticipantRole::L2_ENDPOINT: return "L2_ENDPOINT";
  }
  return "?";
}

ParticipantRole role_from_name(const std::string& s) {
  if (s == "RECEIVER") return ParticipantRole::RECEIVER;
  if (s == "PASSIVE") return ParticipantRole::PASSIVE;
  if (s == "RELAY") return ParticipantRole::RELAY;
  if (s == "ENDPOINT") return ParticipantRole::ENDPOINT;
  if (s == "L1_ENDPOINT") return ParticipantRole::L1_ENDPOINT;
  if (s == "L2_ENDPOINT") return ParticipantRole::L2_ENDPOINT;
  throw Error(Errc::ParseError, "unknown participant role '" + s + "'");
}

const ParticipantPolicy* SessionPolicy::block_for_node(const std::string& node_id) const {
  for (const auto& p : participants)
    if (p.node_id == node_id) return &p;
  return nullptr;
}

void validate_policy(const SessionPolicy& policy) {
  if (policy.session_id.empty())
    throw Error(Errc::ValidationError, "policy has no session id");
  if (policy.session_key_id.empty())
    throw Error(Errc::ValidationError, "policy has no session key id");
  if (policy.out_len_bits == 0 || policy.out_len_bits % 8 != 0)
    throw Error(Errc::ValidationError, "out_len_bits must be a positive multiple of 8");
  if (policy.participants.empty())
    throw Error(Errc::ValidationError, "policy has no participants");

  auto count = [&](ParticipantRole r) {
    return std::count_if(policy.participants.begin(), policy.participants.end(),
                         [&](const ParticipantPolicy& p) { return p.role == r; });
  };
  switch (policy.level) {
    case SecurityLevel::L1:
      if (count(ParticipantRole::L1_ENDPOINT) != 2)
        throw Error(Errc::ValidationError, "L1 policy requires two L1_ENDPOINT blocks");
      break;
    case SecurityLevel::L2:
      if (count(ParticipantRole::L2_ENDPOINT) != 2)
        throw Error(Errc::ValidationError, "L2 policy requires two L2_ENDPOINT blocks");
      if (policy.relay_rules.size() < 2)
        throw Error(Errc::ValidationError, "L2 policy requires a relay rule per hop node");
      break;
    case SecurityLevel::L3:
      if (count(ParticipantRole::RECEIVER) != 1 || count(ParticipantRole::PASSIVE) != 1 ||
          count(ParticipantRole::RELAY) < 1)
        throw Error(Errc::ValidationError,
                    "L3 policy requires one RECEIVER, one PASSIVE, and a RELAY");
      break;
    case SecurityLevel::L4:
      if (count(ParticipantRole::ENDPOINT) != 2)
        throw Error(Errc::ValidationError, "L4 policy requires two ENDPOINT blocks");
      break;
  }

  int initiators = 0;
  for (const auto& p : policy.participants) {
    if (p.initiator) ++initiators;
  }
  if (initiators != 1)
    throw Error(Errc::ValidationError, "policy requires exactly one initiator block");
}

void to_json(nlohmann::json& j, const RelayRule& r) {
  j = {{"session_id", r.session_id}, {"kms_id", r.kms_id},
       {"kms_endpoint", r.kms_endpoint}, {"upstream", r.upstream},
       {"downstream", r.downstream},  {"link_in", r.link_in},
       {"link_out", r.link_out},      {"downstream_endpoint", r.downstream_endpoint}};
}

void from_json(const nlohmann::json& j, RelayRule& r) {
  r.session_id = j.at("session_id").get<std::string>();
  r.kms_id = j.value("kms_id", "");
  r.kms_endpoint = j.value("kms_endpoint", "");
  r.upstream = j.value("upstream", "");
  r.downstream = j.value("downstream", "");
  r.link_in = j.value("link_in", "");
  r.link_out = j.value("link_out", "");
  r.downstream_endpoint = j.value("downstream_endpoint", "");
}

void to_json(nlohmann::json& j, const ParticipantPolicy& p) {
  nlohmann::json peers = nlohmann::json::object();
  for (const auto& [role, ref] : p.peers)
    peers[role] = {{"node_id", ref.node_id}, {"app", ref.app}, {"endpoint", ref.endpoint}};
  nlohmann::json suites = nlohmann::json::array();
  for (auto s : p.kem_suites) suites.push_back(kem_suite_name(s));
  j = {{"node_id", p.node_id},
       {"role", role_name(p.role)},
       {"app", p.app},
       {"vkms_endpoint", p.vkms_endpoint},
       {"initiator", p.initiator},
       {"kem_suites", suites},
       {"kdf_recipe", p.kdf_recipe},
       {"peers", peers},
       {"kms_id", p.kms_id},
       {"kms_endpoint", p.kms_endpoint},
       {"link_id", p.link_id},
       {"relay_path", p.relay_path}};
}

void from_json(const nlohmann::json& j, ParticipantPolicy& p) {
  p.node_id = j.at("node_id").get<std::string>();
  p.role = role_from_name(j.at("role").get<std::string>());
  p.app = j.value("app", "");
  p.vkms_endpoint = j.value("vkms_endpoint", "");
  p.initiator = j.value("initiator", false);
  p.kem_suites.clear();
  for (const auto& s : j.value("kem_suites", nlohmann::json::array()))
    p.kem_suites.push_back(kem_suite_from_name(s.get<std::string>()));
  p.kdf_recipe = j.value("kdf_recipe", std::vector<std::string>{});
  p.peers.clear();
  // Bound to a named value: items() on a temporary dangles before C++23.
  const nlohmann::json peers = j.value("peers", nlohmann::json::object());
  for (const auto& [role, ref] : peers.items()) {
    p.peers[role] = PeerRef{ref.value("node_id", ""), ref.value("app", ""),
                            ref.value("endpoint", "")};
  }
  p.kms_id = j.value("kms_id", "");
  p.kms_endpoint = j.value("kms_endpoint", "");
  p.link_id = j.value("link_id", "");
  p.relay_path = j.value("relay_path", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const SessionPolicy& p) {
  j = {{"version", p.version},
       {"session_id", p.session_id},
       {"session_key_id", p.session_key_id},
       {"level", level_name(p.level)},
       {"initiator_app", p.initiator_app},
       {"target_app", p.target_app},
       {"out_len_bits", p.out_len_bits},
       {"dual_kem", p.dual_kem},
       {"participants", p.participants},
       {"relay_rules", p.relay_rules},
       {"requirements", p.requirements}};
}

void from_json(const nlohmann::json& j, SessionPolicy& p) {
  p.version = j.value("version", 1);
  p.session_id = j.at("session_id").get<std::string>();
  p.session_key_id = j.at("session_key_id").get<std::string>();
  p.level = level_from_name(j.at("level").get<std::string>());
  p.initiator_app = j.value("initiator_app", "");
  p.target_app = j.value("target_app", "");
  p.out_len_bits = j.value("out_len_bits", std::size_t{256});
  p.dual_kem = j.value("dual_kem", false);
  p.participants = j.value("participants", std::vector<ParticipantPolicy>{});
  p.relay_rules = j.value("relay_rules", std::vector<RelayRule>{});
  p.requirements = j.value("requirements", nlohmann::json::object());
}

}  // namespace qsnet
