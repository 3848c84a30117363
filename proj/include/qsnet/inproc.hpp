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

#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>

#include "qsnet/clients.hpp"
#include "qsnet/kms.hpp"
#include "qsnet/qusec.hpp"
#include "qsnet/vkms.hpp"

namespace qsnet {

/// In-process transport: services registered under "inproc:<id>" endpoints,
/// client calls dispatched as direct function calls. Supports marking a
/// service as down and tampering with messages in flight, so fault and
/// man-in-the-middle scenarios run without a network.
class InprocHub {
 public:
  /// Mutates a vKMS session message in flight. Arguments: destination id,
  /// session id, message type, body.
  using MessageTamper = std::function<void(const std::string&, const std::string&,
                                           std::string&, nlohmann::json&)>;
  /// Mutates a relay envelope in flight. Arguments: destination id, envelope.
  using ForwardTamper = std::function<void(const std::string&, RelayEnvelope&)>;

  void add_qusec(const std::string& id, std::shared_ptr<Qusec> q);
  void add_kms(const std::string& id, std::shared_ptr<KmsService> k);
  void add_vkms(const std::string& id, std::shared_ptr<Vkms> v);

  void set_down(const std::string& id, bool down);
  void set_message_tamper(MessageTamper t);
  void set_forward_tamper(ForwardTamper t);

  std::shared_ptr<ClientFactory> factory();

  static std::string endpoint_of(const std::string& id) { return "inproc:" + id; }

  // Internal dispatch, used by the client wrappers.
  std::shared_ptr<Qusec> qusec_at(const std::string& endpoint, bool controller) const;
  std::shared_ptr<KmsService> kms_at(const std::string& endpoint) const;
  std::shared_ptr<Vkms> vkms_at(const std::string& endpoint) const;
  MessageTamper message_tamper() const;
  ForwardTamper forward_tamper() const;

 private:
  std::string strip(const std::string& endpoint, bool controller) const;

  std::unordered_map<std::string, std::shared_ptr<Qusec>> qusecs_;
  std::unordered_map<std::string, std::shared_ptr<KmsService>> kmss_;
  std::unordered_map<std::string, std::shared_ptr<Vkms>> vkmss_;
  std::set<std::string> down_;
  MessageTamper message_tamper_;
  ForwardTamper forward_tamper_;
  mutable std::mutex mu_;
};

}  // namespace qsnet
