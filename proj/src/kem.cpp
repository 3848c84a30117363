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

#include "qsnet/kem.hpp"

#include "qsnet/errors.hpp"
#include "qsnet/mlkem768.hpp"
#include "qsnet/toy_kem.hpp"

namespace qsnet {

namespace {

constexpr KemSuite kMlKem768{KemSuiteId::ML_KEM_768, mlkem768::kPublicKeyLen,
                             mlkem768::kSecretKeyLen, mlkem768::kCiphertextLen,
                             mlkem768::kSharedSecretLen};
constexpr KemSuite kToyKem{KemSuiteId::TOY_KEM, toy_kem::kPublicKeyLen,
                           toy_kem::kSecretKeyLen, toy_kem::kCiphertextLen,
                           toy_kem::kSharedSecretLen};

}  // namespace

const KemSuite& kem_suite(KemSuiteId id) {
  switch (id) {
    case KemSuiteId::ML_KEM_768:
      return kMlKem768;
    case KemSuiteId::TOY_KEM:
      return kToyKem;
  }
  throw Error(Errc::UnsupportedSuite, "unknown KEM suite id");
}

std::string kem_suite_name(KemSuiteId id) {
  switch (id) {
    case KemSuiteId::ML_KEM_768:
      return "ML_KEM_768";
    case KemSuiteId::TOY_KEM:
      return "TOY_KEM";
  }
  throw Error(Errc::UnsupportedSuite, "unknown KEM suite id");
}

KemSuiteId kem_suite_from_name(const std::string& name) {
  if (name == "ML_KEM_768") return KemSuiteId::ML_KEM_768;
  if (name == "TOY_KEM") return KemSuiteId::TOY_KEM;
  throw Error(Errc::UnsupportedSuite, "unknown KEM suite: " + name);
}

KemKeyPair kem_keygen(KemSuiteId suite, RandomSource& randomness) {
  switch (suite) {
    case KemSuiteId::ML_KEM_768: {
      auto kp = mlkem768::keygen(randomness);
      return {std::move(kp.public_key), std::move(kp.secret_key)};
    }
    case KemSuiteId::TOY_KEM: {
      auto kp = toy_kem::keygen(randomness);
      return {std::move(kp.public_key), std::move(kp.secret_key)};
    }
  }
  throw Error(Errc::UnsupportedSuite, "unknown KEM suite id");
}

KemEncapsulation kem_encapsulate(KemSuiteId suite, BytesView public_key,
                                 RandomSource& randomness) {
  switch (suite) {
    case KemSuiteId::ML_KEM_768: {
      auto res = mlkem768::encapsulate(public_key, randomness);
      return {std::move(res.ciphertext), KeyMaterial(std::move(res.shared_secret))};
    }
    case KemSuiteId::TOY_KEM: {
      auto res = toy_kem::encapsulate(public_key, randomness);
      return {std::move(res.ciphertext), KeyMaterial(std::move(res.shared_secret))};
    }
  }
  throw Error(Errc::UnsupportedSuite, "unknown KEM suite id");
}

KeyMaterial kem_decapsulate(KemSuiteId suite, BytesView secret_key, BytesView ciphertext) {
  switch (suite) {
    case KemSuiteId::ML_KEM_768:
      return KeyMaterial(mlkem768::decapsulate(secret_key, ciphertext));
    case KemSuiteId::TOY_KEM:
      return KeyMaterial(toy_kem::decapsulate(secret_key, ciphertext));
  }
  throw Error(Errc::UnsupportedSuite, "unknown KEM suite id");
}

}  // namespace qsnet
