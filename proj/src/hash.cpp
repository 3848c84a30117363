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

#include "qsnet/hash.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "qsnet/errors.hpp"

namespace qsnet {

namespace {

Bytes digest(const EVP_MD* md, BytesView data) {
  Bytes out(static_cast<std::size_t>(EVP_MD_get_size(md)));
  unsigned int n = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &n, md, nullptr) != 1)
    throw Error(Errc::Internal, "EVP_Digest failed");
  out.resize(n);
  return out;
}

Bytes xof(const EVP_MD* md, BytesView data, std::size_t out_len) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error(Errc::Internal, "EVP_MD_CTX_new failed");
  Bytes out(out_len);
  bool ok = EVP_DigestInit_ex(ctx, md, nullptr) == 1 &&
            EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
            EVP_DigestFinalXOF(ctx, out.data(), out_len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error(Errc::Internal, "SHAKE digest failed");
  return out;
}

}  // namespace

Bytes sha256(BytesView data) { return digest(EVP_sha256(), data); }
Bytes sha3_256(BytesView data) { return digest(EVP_sha3_256(), data); }
Bytes sha3_512(BytesView data) { return digest(EVP_sha3_512(), data); }

Bytes shake128(BytesView data, std::size_t out_len) {
  return xof(EVP_shake128(), data, out_len);
}

Bytes shake256(BytesView data, std::size_t out_len) {
  return xof(EVP_shake256(), data, out_len);
}

Bytes hmac_sha256(BytesView key, BytesView data) {
  Bytes out(32);
  unsigned int n = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
            data.size(), out.data(), &n))
    throw Error(Errc::Internal, "HMAC failed");
  out.resize(n);
  return out;
}

Bytes hkdf_extract_sha256(BytesView salt, BytesView ikm) {
  return hmac_sha256(salt, ikm);
}

Bytes hkdf_expand_sha256(BytesView prk, BytesView info, std::size_t out_len) {
  if (out_len == 0 || out_len > 255 * 32)
    throw Error(Errc::LengthMismatch, "HKDF output length out of range");
  Bytes okm;
  okm.reserve(out_len);
  Bytes t;
  std::uint8_t counter = 1;
  while (okm.size() < out_len) {
    Bytes block = t;
    block.insert(block.end(), info.begin(), info.end());
    block.push_back(counter++);
    t = hmac_sha256(prk, block);
    okm.insert(okm.end(), t.begin(), t.end());
  }
  okm.resize(out_len);
  return okm;
}

}  // namespace qsnet
