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

#include "qsnet/topology.hpp"

#include <algorithm>
#include <deque>

#include "qsnet/errors.hpp"

namespace qsnet {

const char* node_kind_name(NodeKind k) { return k == NodeKind::QN ? "QN" : "CN"; }

NodeKind node_kind_from_name(const std::string& s) {
  if (s == "QN") return NodeKind::QN;
  if (s == "CN") return NodeKind::CN;
  throw Error(Errc::ParseError, "unknown node kind '" + s + "'");
}

std::string make_link_id(const std::string& a, const std::string& b) {
  return a < b ? "link_" + a + "-" + b : "link_" + b + "-" + a;
}

void Topology::add_node(const NodeDescriptor& node) {
  if (node.node_id.empty())
    throw Error(Errc::ValidationError, "node id must be non-empty");
  if (nodes_.count(node.node_id))
    throw Error(Errc::DuplicateId, "node '" + node.node_id + "' already registered");
  if (node.kind == NodeKind::CN && !node.kms_ids.empty())
    throw Error(Errc::ValidationError,
                "CN node '" + node.node_id + "' cannot declare KMS modules");
  if (node.kind == NodeKind::QN && node.kms_ids.empty())
    throw Error(Errc::ValidationError,
                "QN node '" + node.node_id + "' must declare at least one KMS");
  for (const auto& app : node.hosted_apps) {
    if (app_to_node_.count(app))
      throw Error(Errc::DuplicateId, "application '" + app + "' already hosted on '" +
                                         app_to_node_[app] + "'");
  }
  nodes_.emplace(node.node_id, node);
  for (const auto& app : node.hosted_apps) app_to_node_[app] = node.node_id;
  adjacency_.emplace(node.node_id, std::vector<std::string>{});
}

void Topology::add_link(const QkdLinkInfo& link) {
  QkdLinkInfo l = link;
  if (l.link_id.empty()) l.link_id = make_link_id(l.endpoint_a, l.endpoint_b);
  if (links_.count(l.link_id))
    throw Error(Errc::DuplicateId, "link '" + l.link_id + "' already registered");
  if (l.endpoint_a == l.endpoint_b)
    throw Error(Errc::ValidationError, "link endpoints must differ");
  if (l.key_size_bits == 0 || l.key_size_bits % 8 != 0)
    throw Error(Errc::ValidationError, "link key size must be a positive multiple of 8");
  for (const auto& ep : {l.endpoint_a, l.endpoint_b}) {
    const NodeDescriptor* n = find_node(ep);
    if (!n)
      throw Error(Errc::UnknownEndpoint, "link endpoint '" + ep + "' not registered");
    if (n->kind != NodeKind::QN)
      throw Error(Errc::UnknownEndpoint,
                  "link endpoint '" + ep + "' is a CN and cannot hold QKD links");
  }
  links_.emplace(l.link_id, l);
  auto add_adj = [&](const std::string& from, const std::string& to) {
    auto& v = adjacency_[from];
    if (std::find(v.begin(), v.end(), to) == v.end()) {
      v.push_back(to);
      std::sort(v.begin(), v.end());
    }
  };
  add_adj(l.endpoint_a, l.endpoint_b);
  add_adj(l.endpoint_b, l.endpoint_a);
}

const NodeDescriptor* Topology::find_node(const std::string& node_id) const {
  auto it = nodes_.find(node_id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const NodeDescriptor& Topology::node(const std::string& node_id) const {
  const NodeDescriptor* n = find_node(node_id);
  if (!n) throw Error(Errc::UnknownEndpoint, "unknown node '" + node_id + "'");
  return *n;
}

const NodeDescriptor* Topology::node_of_app(const std::string& app) const {
  auto it = app_to_node_.find(app);
  return it == app_to_node_.end() ? nullptr : find_node(it->second);
}

const QkdLinkInfo* Topology::find_link(const std::string& link_id) const {
  auto it = links_.find(link_id);
  return it == links_.end() ? nullptr : &it->second;
}

const QkdLinkInfo* Topology::link_between(const std::string& a,
                                          const std::string& b) const {
  for (const auto& [id, l] : links_) {
    if ((l.endpoint_a == a && l.endpoint_b == b) ||
        (l.endpoint_a == b && l.endpoint_b == a))
      return &l;
  }
  return nullptr;
}

std::vector<std::string> Topology::neighbors(const std::string& node_id) const {
  auto it = adjacency_.find(node_id);
  return it == adjacency_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> Topology::shortest_path(const std::string& from,
                                                 const std::string& to) const {
  if (!find_node(from) || !find_node(to)) return {};
  if (from == to) return {from};
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (const auto& nb : neighbors(cur)) {
      if (parent.count(nb)) continue;
      parent[nb] = cur;
      if (nb == to) {
        std::vector<std::string> path{to};
        for (std::string p = cur; ; p = parent[p]) {
          path.push_back(p);
          if (p == from) break;
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(nb);
    }
  }
  return {};
}

void to_json(nlohmann::json& j, const NodeDescriptor& n) {
  j = {{"node_id", n.node_id},
       {"kind", node_kind_name(n.kind)},
       {"kms_ids", n.kms_ids},
       {"kms_endpoints", n.kms_endpoints},
       {"vkms_endpoint", n.vkms_endpoint},
       {"hosted_apps", n.hosted_apps}};
}

void from_json(const nlohmann::json& j, NodeDescriptor& n) {
  n.node_id = j.at("node_id").get<std::string>();
  n.kind = node_kind_from_name(j.at("kind").get<std::string>());
  n.kms_ids = j.value("kms_ids", std::vector<std::string>{});
  n.kms_endpoints = j.value("kms_endpoints", std::vector<std::string>{});
  n.vkms_endpoint = j.value("vkms_endpoint", "");
  n.hosted_apps = j.value("hosted_apps", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const QkdLinkInfo& l) {
  j = {{"link_id", l.link_id},
       {"endpoint_a", l.endpoint_a},
       {"endpoint_b", l.endpoint_b},
       {"key_size_bits", l.key_size_bits},
       {"rate_keys_per_sec", l.rate_keys_per_sec},
       {"seed", l.seed}};
}

void from_json(const nlohmann::json& j, QkdLinkInfo& l) {
  l.link_id = j.value("link_id", "");
  l.endpoint_a = j.at("endpoint_a").get<std::string>();
  l.endpoint_b = j.at("endpoint_b").get<std::string>();
  l.key_size_bits = j.value("key_size_bits", std::size_t{256});
  l.rate_keys_per_sec = j.value("rate_keys_per_sec", 1.0);
  l.seed = j.value("seed", std::uint64_t{0});
}

}  // namespace qsnet
