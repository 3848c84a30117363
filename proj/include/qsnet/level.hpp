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

#include <string>

#include "qsnet/errors.hpp"

namespace qsnet {

/// Per-session protection mode. Preference ordering is L1 > L2 > L3 > L4:
/// direct QKD, multi-hop QKD relay, QKD+PQC hybrid, pure PQC.
enum class SecurityLevel : int { L1 = 1, L2 = 2, L3 = 3, L4 = 4 };

inline int level_number(SecurityLevel l) { return static_cast<int>(l); }

inline const char* level_name(SecurityLevel l) {
  switch (l) {
    case SecurityLevel::L1: return "L1";
    case SecurityLevel::L2: return "L2";
    case SecurityLevel::L3: return "L3";
    case SecurityLevel::L4: return "L4";
  }
  return "?";
}

inline SecurityLevel level_from_name(const std::string& s) {
  if (s == "L1") return SecurityLevel::L1;
  if (s == "L2") return SecurityLevel::L2;
  if (s == "L3") return SecurityLevel::L3;
  if (s == "L4") return SecurityLevel::L4;
  throw Error(Errc::ParseError, "unknown security level '" + s + "'");
}

/// True when a is preferred over b (lower level number wins).
inline bool level_preferred(SecurityLevel a, SecurityLevel b) {
  return level_number(a) < level_number(b);
}

}  // namespace qsnet
