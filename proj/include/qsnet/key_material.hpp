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

#include <utility>

#include "qsnet/bytes.hpp"
#include "qsnet/errors.hpp"

namespace qsnet {

/// Raw symmetric key bytes. Bit length is always 8x the byte count and
/// never zero; the buffer is scrubbed on destruction (best effort — copies
/// and moved-from shells are the caller's concern).
class KeyMaterial {
 public:
  KeyMaterial() = default;

  explicit KeyMaterial(Bytes bytes) : bytes_(std::move(bytes)) {
    if (bytes_.empty())
      throw Error(Errc::LengthMismatch, "key material must be non-empty");
  }

  KeyMaterial(const KeyMaterial&) = default;
  KeyMaterial& operator=(const KeyMaterial&) = default;
  KeyMaterial(KeyMaterial&&) noexcept = default;
  KeyMaterial& operator=(KeyMaterial&&) noexcept = default;

  ~KeyMaterial() { secure_wipe(bytes_); }

  const Bytes& bytes() const { return bytes_; }
  std::size_t length_bits() const { return bytes_.size() * 8; }
  std::size_t size() const { return bytes_.size(); }
  bool empty() const { return bytes_.empty(); }

  BytesView view() const { return bytes_; }

  void wipe() {
    secure_wipe(bytes_);
    bytes_.clear();
  }

  friend bool operator==(const KeyMaterial& a, const KeyMaterial& b) {
    return a.bytes_ == b.bytes_;
  }

 private:
  Bytes bytes_;
};

}  // namespace qsnet
