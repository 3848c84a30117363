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

#include <string>
#include <vector>

#include "qsnet/key_material.hpp"
#include "qsnet/level.hpp"

namespace qsnet {

/// One labeled secret entering the combiner, e.g. ("qkd", <relayed key>) or
/// ("kem1", <KEM shared secret>). Labels must be non-empty and unique within
/// a derivation.
struct SecretInput {
  std::string label;
  KeyMaterial material;
};

/// Session context bound into the derivation so equal secrets in different
/// sessions never yield equal keys.
struct DerivationContext {
  std::string session_id;
  std::string initiator_app;
  std::string target_app;
  SecurityLevel level = SecurityLevel::L4;
  std::size_t out_len_bits = 256;
};

/// Hybrid key combiner: HKDF-SHA256 extract-then-expand, keyed over the
/// ordered concatenation of length-prefixed (label, material) pairs, with
/// the session context bound into the info string.
///
/// Layout (all length prefixes 32-bit big-endian):
///   IKM  = || over inputs of  lv(label) || lv(material)
///   PRK  = HMAC-SHA256("qsnet-hybrid-kdf-v1", IKM)
///   info = "qsnet-session-key" || 0x00 || lv(session_id) ||
///          lv(initiator_app) || lv(target_app) || u8(level) ||
///          be32(out_len_bits)
///   out  = HKDF-Expand(PRK, info, out_len_bits / 8)
///
/// The output is as strong as the strongest input: recovering it requires
/// every contributing secret.
KeyMaterial kdf_combine(const std::vector<SecretInput>& inputs,
                        const DerivationContext& ctx);

}  // namespace qsnet
