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

#include <optional>
#include <stdexcept>
#include <string>

namespace qsnet {

/// Typed error codes shared by all services. The HTTP layer carries the
/// symbolic name on the wire so remote failures rethrow as the same code.
enum class Errc {
  // crypto
  LengthMismatch,
  UnsupportedSuite,
  MalformedPublicKey,
  MalformedCiphertext,
  MalformedSecretKey,
  EmptyInputs,
  DuplicateLabel,
  KemFailure,
  OtpLengthMismatch,
  IntegrityCheckFailed,
  // qkd / kms
  UnknownLink,
  KeysExhausted,
  SizeUnavailable,
  UnknownKeyId,
  AlreadyConsumed,
  DuplicateSession,
  NoRule,
  LinkKeysExhausted,
  NoRelayedKey,
  // controller
  DuplicateId,
  UnknownEndpoint,
  UnknownApplication,
  NoQuantumPath,
  InfeasibleLevel,
  ParticipantUnreachable,
  UnknownSession,
  NotYetDerived,
  // vkms
  WrongCaller,
  AlreadyDelivered,
  RoleKindMismatch,
  LocalKmsUnavailable,
  ControllerUnreachable,
  DerivationFailed,
  // harness / io
  ParseError,
  ValidationError,
  AssignmentMismatch,
  KeyMismatch,
  NoSamples,
  InvalidRequest,
  ServiceUnavailable,
  Internal,
};

const char* errc_name(Errc c);
std::optional<Errc> errc_from_name(const std::string& name);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Error(Errc code, const std::string& message, Errc cause)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message +
                           " (cause: " + errc_name(cause) + ")"),
        code_(code),
        cause_(cause) {}

  Errc code() const { return code_; }
  std::optional<Errc> cause() const { return cause_; }

 private:
  Errc code_;
  std::optional<Errc> cause_;
};

}  // namespace qsnet
