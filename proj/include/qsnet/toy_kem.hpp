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

// Hash-based stand-in KEM with the same call shape as a real one. It offers
// no security (the shared secret is recoverable from pk and ct) and exists
// so protocol tests can swap in small, cheap, fully deterministic keys.

#pragma once

#include "qsnet/bytes.hpp"
#include "qsnet/rng.hpp"

namespace qsnet::toy_kem {

inline constexpr std::size_t kPublicKeyLen = 32;
inline constexpr std::size_t kSecretKeyLen = 32;
inline constexpr std::size_t kCiphertextLen = 32;
inline constexpr std::size_t kSharedSecretLen = 32;

struct KeyPair {
  Bytes public_key;
  Bytes secret_key;
};

struct EncapsResult {
  Bytes ciphertext;
  Bytes shared_secret;
};

KeyPair keygen(RandomSource& rng);
EncapsResult encapsulate(BytesView public_key, RandomSource& rng);
Bytes decapsulate(BytesView secret_key, BytesView ciphertext);

}  // namespace qsnet::toy_kem
