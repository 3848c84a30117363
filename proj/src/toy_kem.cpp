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

#include "qsnet/toy_kem.hpp"

#include "qsnet/errors.hpp"
#include "qsnet/hash.hpp"

namespace qsnet::toy_kem {

namespace {

Bytes tagged(const char* tag, std::initializer_list<BytesView> parts) {
  Bytes buf = to_bytes(tag);
  for (auto p : parts) buf.insert(buf.end(), p.begin(), p.end());
  return buf;
}

Bytes derive_public(BytesView sk) {
  return shake256(tagged("qsnet-toykem-pk", {sk}), kPublicKeyLen);
}

}  // namespace

KeyPair keygen(RandomSource& rng) {
  KeyPair kp;
  kp.secret_key = rng.bytes(kSecretKeyLen);
  kp.public_key = derive_public(kp.secret_key);
  return kp;
}

EncapsResult encapsulate(BytesView public_key, RandomSource& rng) {
  if (public_key.size() != kPublicKeyLen)
    throw Error(Errc::MalformedPublicKey, "toy public key must be 32 octets");
  Bytes m = rng.bytes(32);
  Bytes mask = shake256(tagged("qsnet-toykem-mask", {public_key}), 32);
  EncapsResult res;
  res.ciphertext = xor_bytes(m, mask);
  res.shared_secret = shake256(tagged("qsnet-toykem-ss", {public_key, m}), kSharedSecretLen);
  secure_wipe(m);
  return res;
}

Bytes decapsulate(BytesView secret_key, BytesView ciphertext) {
  if (secret_key.size() != kSecretKeyLen)
    throw Error(Errc::MalformedSecretKey, "toy secret key must be 32 octets");
  if (ciphertext.size() != kCiphertextLen)
    throw Error(Errc::MalformedCiphertext, "toy ciphertext must be 32 octets");
  Bytes pk = derive_public(secret_key);
  Bytes mask = shake256(tagged("qsnet-toykem-mask", {pk}), 32);
  Bytes m = xor_bytes(ciphertext, mask);
  Bytes ss = shake256(tagged("qsnet-toykem-ss", {pk, m}), kSharedSecretLen);
  secure_wipe(m);
  return ss;
}

}  // namespace qsnet::toy_kem
