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

#include <chrono>
#include <string>

#include <json.hpp>

#include "qsnet/level.hpp"

namespace qsnet {

enum class Side { INITIATOR, TARGET };

inline const char* side_name(Side s) {
  return s == Side::INITIATOR ? "INITIATOR" : "TARGET";
}

inline Side side_from_name(const std::string& s) {
  return s == "TARGET" ? Side::TARGET : Side::INITIATOR;
}

/// Wall-clock decomposition of one key establishment, measured around the
/// protocol phase boundaries on one side. Phases are disjoint, so their sum
/// never exceeds t_e2e beyond measurement noise.
struct PhaseTimings {
  std::string session_id;
  SecurityLevel level = SecurityLevel::L4;
  Side side = Side::INITIATOR;
  double t_assignment_ms = 0.0;
  double t_configuration_ms = 0.0;
  double t_derivation_ms = 0.0;
  double t_delivery_ms = 0.0;
  double t_e2e_ms = 0.0;
};

/// Milliseconds between two steady_clock samples.
inline double ms_between(std::chrono::steady_clock::time_point a,
                         std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

inline void to_json(nlohmann::json& j, const PhaseTimings& t) {
  j = {{"session_id", t.session_id},
       {"level", level_name(t.level)},
       {"side", side_name(t.side)},
       {"t_assignment_ms", t.t_assignment_ms},
       {"t_configuration_ms", t.t_configuration_ms},
       {"t_derivation_ms", t.t_derivation_ms},
       {"t_delivery_ms", t.t_delivery_ms},
       {"t_e2e_ms", t.t_e2e_ms}};
}

inline void from_json(const nlohmann::json& j, PhaseTimings& t) {
  t.session_id = j.value("session_id", "");
  t.level = level_from_name(j.at("level").get<std::string>());
  t.side = side_from_name(j.at("side").get<std::string>());
  t.t_assignment_ms = j.value("t_assignment_ms", 0.0);
  t.t_configuration_ms = j.value("t_configuration_ms", 0.0);
  t.t_derivation_ms = j.value("t_derivation_ms", 0.0);
  t.t_delivery_ms = j.value("t_delivery_ms", 0.0);
  t.t_e2e_ms = j.value("t_e2e_ms", 0.0);
}

}  // namespace qsnet
