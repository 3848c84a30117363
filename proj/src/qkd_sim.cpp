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

#include "qsnet/qkd_sim.hpp"

#include "qsnet/errors.hpp"
#include "qsnet/hash.hpp"

namespace qsnet {

namespace {

Bytes stream_input(const char* tag, const QkdLinkInfo& info, std::uint64_t counter) {
  Bytes in = to_bytes(tag);
  Bytes lid = to_bytes(info.link_id);
  in.insert(in.end(), lid.begin(), lid.end());
  in.push_back(0x00);
  put_be64(in, info.seed);
  put_be64(in, counter);
  return in;
}

}  // namespace

void QkdFabric::register_link(const QkdLinkInfo& link, KmsService* kms_a,
                              KmsService* kms_b) {
  QkdLinkInfo info = link;
  if (info.link_id.empty())
    info.link_id = make_link_id(info.endpoint_a, info.endpoint_b);
  std::lock_guard lock(mu_);
  if (links_.count(info.link_id))
    throw Error(Errc::DuplicateId, "link '" + info.link_id + "' already registered");
  if (!kms_a || !kms_b)
    throw Error(Errc::ValidationError, "link requires a KMS on both endpoints");
  kms_a->attach_link(info.link_id, info.endpoint_b, info.key_size_bits);
  kms_b->attach_link(info.link_id, info.endpoint_a, info.key_size_bits);
  links_.emplace(info.link_id, LinkState{info, kms_a, kms_b, 0});
}

std::pair<std::string, KeyMaterial> QkdFabric::generate_next_key(
    const std::string& link_id) {
  std::lock_guard lock(mu_);
  auto it = links_.find(link_id);
  if (it == links_.end())
    throw Error(Errc::UnknownLink, "link '" + link_id + "' not registered");
  LinkState& state = it->second;

  KeyMaterial key(shake256(stream_input("qsnet-qkd-key", state.info, state.counter),
                           state.info.key_size_bits / 8));
  Bytes id_bytes = sha3_256(stream_input("qsnet-qkd-id", state.info, state.counter));
  id_bytes.resize(16);
  std::string key_id = uuid_from_bytes(id_bytes);
  ++state.counter;

  // Paired delivery: both inserts happen under the fabric lock so no
  // observer ever sees the key on one side only.
  state.kms_a->insert_link_key(link_id, key_id, key);
  state.kms_b->insert_link_key(link_id, key_id, key);
  return {key_id, key};
}

std::size_t QkdFabric::fill_stores(const std::string& link_id, std::size_t count) {
  {
    std::lock_guard lock(mu_);
    if (!links_.count(link_id))
      throw Error(Errc::UnknownLink, "link '" + link_id + "' not registered");
  }
  for (std::size_t i = 0; i < count; ++i) generate_next_key(link_id);
  return count;
}

bool QkdFabric::has_link(const std::string& link_id) const {
  std::lock_guard lock(mu_);
  return links_.count(link_id) > 0;
}

KmsService::Refill QkdFabric::refill_hook() {
  return [this](const std::string& link_id) {
    if (!has_link(link_id)) return false;
    generate_next_key(link_id);
    return true;
  };
}

}  // namespace qsnet
