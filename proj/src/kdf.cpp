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

#include "qsnet/kdf.hpp"

#include <unordered_set>

#include "qsnet/hash.hpp"

namespace qsnet {

namespace {
const std::string kSalt = "qsnet-hybrid-kdf-v1";
const std::string kInfoPrefix = "qsnet-session-key";
}  // namespace

KeyMaterial kdf_combine(const std::vector<SecretInput>& inputs,
                        const DerivationContext& ctx) {
  if (inputs.empty())
    throw Error(Errc::EmptyInputs, "kdf_combine requires at least one input");
  if (ctx.out_len_bits == 0 || ctx.out_len_bits % 8 != 0)
    throw Error(Errc::LengthMismatch,
                "out_len_bits must be a positive multiple of 8");

  std::unordered_set<std::string> seen;
  Bytes ikm;
  for (const auto& in : inputs) {
    if (in.label.empty())
      throw Error(Errc::DuplicateLabel, "input label must be non-empty");
    if (!seen.insert(in.label).second)
      throw Error(Errc::DuplicateLabel, "duplicate input label '" + in.label + "'");
    put_lv(ikm, in.label);
    put_lv(ikm, in.material.view());
  }

  Bytes prk = hkdf_extract_sha256(to_bytes(kSalt), ikm);

  Bytes info = to_bytes(kInfoPrefix);
  info.push_back(0x00);
  put_lv(info, ctx.session_id);
  put_lv(info, ctx.initiator_app);
  put_lv(info, ctx.target_app);
  info.push_back(static_cast<std::uint8_t>(level_number(ctx.level)));
  put_be32(info, static_cast<std::uint32_t>(ctx.out_len_bits));

  Bytes okm = hkdf_expand_sha256(prk, info, ctx.out_len_bits / 8);
  secure_wipe(ikm);
  secure_wipe(prk);
  return KeyMaterial(std::move(okm));
}

}  // namespace qsnet
