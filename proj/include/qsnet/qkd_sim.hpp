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
#include <mutex>
#include <string>
#include <utility>

#include "qsnet/kms.hpp"
#include "qsnet/topology.hpp"

namespace qsnet {

/// Deterministic pseudo-QKD quantum plane. Each link owns a seeded key
/// stream; every generated key lands in both endpoint KMS stores under the
/// same id, mimicking point-to-point QKD key delivery.
///
/// Stream construction (replayable from the seed alone):
///   key    = SHAKE256("qsnet-qkd-key" || link_id || 0x00 ||
///                     be64(seed) || be64(counter), key_size_bits / 8)
///   key_id = uuid(SHA3-256("qsnet-qkd-id" || link_id || 0x00 ||
///                          be64(seed) || be64(counter))[0..16))
class QkdFabric {
 public:
  /// Registers a link and attaches a store side on both endpoint KMSs.
  void register_link(const QkdLinkInfo& link, KmsService* kms_a, KmsService* kms_b);

  /// Generates the next key on the link and delivers it to both stores
  /// atomically. Returns the (key_id, key) pair.
  std::pair<std::string, KeyMaterial> generate_next_key(const std::string& link_id);

  /// Delivers `count` fresh keys; returns the number delivered.
  std::size_t fill_stores(const std::string& link_id, std::size_t count);

  bool has_link(const std::string& link_id) const;

  /// Refill hook for a KMS: produces one key pair on demand.
  KmsService::Refill refill_hook();

 private:
  struct LinkState {
    QkdLinkInfo info;
    KmsService* kms_a = nullptr;
    KmsService* kms_b = nullptr;
    std::uint64_t counter = 0;
  };

  std::map<std::string, LinkState> links_;
  mutable std::mutex mu_;
};

}  // namespace qsnet
