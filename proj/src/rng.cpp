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

#include "qsnet/rng.hpp"

#include <openssl/rand.h>

#include "qsnet/errors.hpp"
#include "qsnet/hash.hpp"

namespace qsnet {

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
    throw Error(Errc::Internal, "RAND_bytes failed");
}

SystemRandom& SystemRandom::instance() {
  static SystemRandom rng;
  return rng;
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  std::size_t off = 0;
  while (off < out.size()) {
    if (pending_.empty()) {
      Bytes input = to_bytes("qsnet-drbg");
      put_be64(input, seed_);
      put_be64(input, block_++);
      pending_ = shake256(input, 64);
    }
    std::size_t n = std::min(pending_.size(), out.size() - off);
    std::copy(pending_.begin(), pending_.begin() + static_cast<long>(n),
              out.begin() + static_cast<long>(off));
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<long>(n));
    off += n;
  }
}

}  // namespace qsnet
