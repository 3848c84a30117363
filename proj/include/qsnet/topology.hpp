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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace qsnet {

/// QN nodes carry QKD hardware and at least one KMS; CN nodes have neither.
enum class NodeKind { QN, CN };

const char* node_kind_name(NodeKind k);
NodeKind node_kind_from_name(const std::string& s);

struct NodeDescriptor {
  std::string node_id;
  NodeKind kind = NodeKind::CN;
  std::vector<std::string> kms_ids;
  std::vector<std::string> kms_endpoints;  // parallel to kms_ids
  std::string vkms_endpoint;
  std::vector<std::string> hosted_apps;
};

struct QkdLinkInfo {
  std::string link_id;
  std::string endpoint_a;
  std::string endpoint_b;
  std::size_t key_size_bits = 256;
  double rate_keys_per_sec = 1.0;
  std::uint64_t seed = 0;
};

/// Conventional id for the link between two nodes, order-independent.
std::string make_link_id(const std::string& a, const std::string& b);

void to_json(nlohmann::json& j, const NodeDescriptor& n);
void from_json(const nlohmann::json& j, NodeDescriptor& n);
void to_json(nlohmann::json& j, const QkdLinkInfo& l);
void from_json(const nlohmann::json& j, QkdLinkInfo& l);

/// Registry of nodes, apps, and QKD links with the registration invariants
/// enforced: unique ids, apps hosted once, links only between distinct QNs.
class Topology {
 public:
  void add_node(const NodeDescriptor& node);
  void add_link(const QkdLinkInfo& link);

  const NodeDescriptor* find_node(const std::string& node_id) const;
  const NodeDescriptor& node(const std::string& node_id) const;
  const NodeDescriptor* node_of_app(const std::string& app) const;
  const QkdLinkInfo* find_link(const std::string& link_id) const;
  const QkdLinkInfo* link_between(const std::string& a, const std::string& b) const;

  /// QN neighbors over QKD links, sorted by node id.
  std::vector<std::string> neighbors(const std::string& node_id) const;

  /// Shortest path by hop count over QKD links, deterministic under ties
  /// (neighbors expanded in lexicographic order). Empty when unreachable.
  std::vector<std::string> shortest_path(const std::string& from,
                                         const std::string& to) const;

  const std::map<std::string, NodeDescriptor>& nodes() const { return nodes_; }
  const std::map<std::string, QkdLinkInfo>& links() const { return links_; }

 private:
  std::map<std::string, NodeDescriptor> nodes_;
  std::map<std::string, QkdLinkInfo> links_;
  std::map<std::string, std::string> app_to_node_;
  std::map<std::string, std::vector<std::string>> adjacency_;
};

}  // namespace qsnet
