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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qsnet {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

std::string to_hex(BytesView data);
Bytes from_hex(const std::string& hex);

std::string to_base64(BytesView data);
Bytes from_base64(const std::string& b64);

/// Appends a 32-bit big-endian length.
void put_be32(Bytes& out, std::uint32_t v);
void put_be64(Bytes& out, std::uint64_t v);

/// Length-prefixed append: be32(len) || data.
void put_lv(Bytes& out, BytesView data);
void put_lv(Bytes& out, const std::string& s);

Bytes xor_bytes(BytesView a, BytesView b);

/// Constant-time equality; false on length mismatch.
bool ct_equal(BytesView a, BytesView b);

/// Best-effort scrubbing of sensitive buffers.
void secure_wipe(Bytes& b);
void secure_wipe(std::span<std::uint8_t> b);

/// Formats 16 bytes as an RFC 4122-shaped UUID string (version/variant
/// bits forced so the result parses as a v4 UUID).
std::string uuid_from_bytes(BytesView b16);

inline Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace qsnet
