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

namespace qsnet {

Bytes sha256(BytesView data);
Bytes sha3_256(BytesView data);
Bytes sha3_512(BytesView data);
Bytes shake128(BytesView data, std::size_t out_len);
Bytes shake256(BytesView data, std::size_t out_len);

Bytes hmac_sha256(BytesView key, BytesView data);

/// RFC 5869 primitives over HMAC-SHA256.
Bytes hkdf_extract_sha256(BytesView salt, BytesView ikm);
Bytes hkdf_expand_sha256(BytesView prk, BytesView info, std::size_t out_len);

}  // namespace qsnet
