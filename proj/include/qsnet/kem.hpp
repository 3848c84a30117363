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

// Suite-indexed KEM facade. ML_KEM_768 is the production suite; TOY_KEM is a
// deterministic stand-in for protocol tests.

#pragma once

#include <string>

#include "qsnet/bytes.hpp"
#include "qsnet/key_material.hpp"
#include "qsnet/rng.hpp"

namespace qsnet {

enum class KemSuiteId {
  ML_KEM_768,
  TOY_KEM,
};

struct KemSuite {
  KemSuiteId suite_id;
  std::size_t public_key_len;
  std::size_t secret_key_len;
  std::size_t ciphertext_len;
  std::size_t shared_secret_len;
};

const KemSuite& kem_suite(KemSuiteId id);
std::string kem_suite_name(KemSuiteId id);
KemSuiteId kem_suite_from_name(const std::string& name);

struct KemKeyPair {
  Bytes public_key;
  Bytes secret_key;
};

struct KemEncapsulation {
  Bytes ciphertext;
  KeyMaterial shared_secret;
};

KemKeyPair kem_keygen(KemSuiteId suite, RandomSource& randomness);
KemEncapsulation kem_encapsulate(KemSuiteId suite, BytesView public_key,
                                 RandomSource& randomness);
KeyMaterial kem_decapsulate(KemSuiteId suite, BytesView secret_key, BytesView ciphertext);

}  // namespace qsnet
