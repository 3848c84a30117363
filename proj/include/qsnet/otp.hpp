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

#include "qsnet/key_material.hpp"

namespace qsnet {

/// One-time-pad transform: bitwise XOR of data with an equal-length pad.
/// Involutive — applying it twice with the same pad returns the input.
/// Throws LengthMismatch when lengths differ. Pad freshness is the
/// caller's responsibility.
KeyMaterial otp_transform(const KeyMaterial& data, const KeyMaterial& pad);

}  // namespace qsnet
