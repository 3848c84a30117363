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

#include "qsnet/otp.hpp"

namespace qsnet {

KeyMaterial otp_transform(const KeyMaterial& data, const KeyMaterial& pad) {
  if (data.length_bits() != pad.length_bits())
    throw Error(Errc::LengthMismatch,
                "pad length " + std::to_string(pad.length_bits()) +
                    " != data length " + std::to_string(data.length_bits()));
  return KeyMaterial(xor_bytes(data.view(), pad.view()));
}

}  // namespace qsnet
