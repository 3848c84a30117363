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

#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qsnet/bytes.hpp"
#include "qsnet/errors.hpp"

namespace qsnet::test {

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

inline nlohmann::json load_test_data(const std::string& name) {
  return load_json_file(std::string(QSNET_TEST_DATA_DIR) + "/" + name);
}

inline Bytes hex(const std::string& s) { return from_hex(s); }

/// Runs fn, which must throw a qsnet Error, and returns its code.
inline Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a qsnet error");
}

}  // namespace qsnet::test
