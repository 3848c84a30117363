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

// Wire-level types shared by the KMS service, its clients, and the policy
// documents that reference them.

#pragma once

#include <string>

#include "qsnet/bytes.hpp"
#include "qsnet/key_material.hpp"

namespace qsnet {

struct KeyWithId {
  std::string key_id;
  KeyMaterial key;
};

struct KmsStatus {
  std::size_t stored_key_count = 0;
  std::size_t key_size_bits = 0;
  bool link_up = false;
};

/// Per-session forwarding rule installed by the controller. upstream and
/// link_in are empty at the entry hop; downstream and link_out are empty at
/// the terminal hop. kms_id and downstream_endpoint carry the addressing the
/// rule's host needs at runtime.
struct RelayRule {
  std::string session_id;
  std::string kms_id;
  std::string kms_endpoint;
  std::string upstream;
  std::string downstream;
  std::string link_in;
  std::string link_out;
  std::string downstream_endpoint;
};

/// One hop of an OTP-forwarded key. payload is the key XORed with the pad
/// identified by pad_key_id on the sending link (plaintext at injection,
/// where pad_key_id is empty).
struct RelayEnvelope {
  std::string session_id;
  std::string key_id;
  Bytes payload;
  std::string pad_key_id;
};

}  // namespace qsnet
