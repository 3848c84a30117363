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

#include "qsnet/bytes.hpp"
#include "qsnet/rng.hpp"

namespace qsnet::mlkem768 {

// FIPS 203 parameter set ML-KEM-768 (k = 3, eta1 = eta2 = 2, du = 10, dv = 4).
inline constexpr std::size_t kPublicKeyLen = 1184;
inline constexpr std::size_t kSecretKeyLen = 2400;
inline constexpr std::size_t kCiphertextLen = 1088;
inline constexpr std::size_t kSharedSecretLen = 32;
inline constexpr std::size_t kSeedLen = 32;

struct KeyPair {
  Bytes public_key;   // ek, 1184 octets
  Bytes secret_key;   // dk = dk_pke || ek || H(ek) || z, 2400 octets
};

struct EncapsResult {
  Bytes ciphertext;      // 1088 octets
  Bytes shared_secret;   // 32 octets
};

/// Deterministic key generation from the 32-byte seeds (d, z).
KeyPair keygen_from_seed(BytesView d, BytesView z);

/// Randomized key generation; draws d and z from the supplied source.
KeyPair keygen(RandomSource& rng);

/// Deterministic encapsulation from a fixed 32-byte message m.
EncapsResult encapsulate_with_message(BytesView public_key, BytesView m);

/// Randomized encapsulation. Throws MalformedPublicKey on a key that fails
/// the length or modulus checks.
EncapsResult encapsulate(BytesView public_key, RandomSource& rng);

/// Decapsulation with implicit rejection: a tampered-but-well-formed
/// ciphertext yields a pseudorandom secret rather than an error. Throws
/// MalformedCiphertext / MalformedSecretKey on length or hash-check
/// failures.
Bytes decapsulate(BytesView secret_key, BytesView ciphertext);

}  // namespace qsnet::mlkem768
