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

#include "qsnet/errors.hpp"

#include <array>
#include <utility>

namespace qsnet {

namespace {
constexpr std::array<std::pair<Errc, const char*>, 40> kNames{{
    {Errc::LengthMismatch, "LengthMismatch"},
    {Errc::UnsupportedSuite, "UnsupportedSuite"},
    {Errc::MalformedPublicKey, "MalformedPublicKey"},
    {Errc::MalformedCiphertext, "MalformedCiphertext"},
    {Errc::MalformedSecretKey, "MalformedSecretKey"},
    {Errc::EmptyInputs, "EmptyInputs"},
    {Errc::DuplicateLabel, "DuplicateLabel"},
    {Errc::KemFailure, "KemFailure"},
    {Errc::OtpLengthMismatch, "OtpLengthMismatch"},
    {Errc::IntegrityCheckFailed, "IntegrityCheckFailed"},
    {Errc::UnknownLink, "UnknownLink"},
    {Errc::KeysExhausted, "KeysExhausted"},
    {Errc::SizeUnavailable, "SizeUnavailable"},
    {Errc::UnknownKeyId, "UnknownKeyId"},
    {Errc::AlreadyConsumed, "AlreadyConsumed"},
    {Errc::DuplicateSession, "DuplicateSession"},
    {Errc::NoRule, "NoRule"},
    {Errc::LinkKeysExhausted, "LinkKeysExhausted"},
    {Errc::NoRelayedKey, "NoRelayedKey"},
    {Errc::DuplicateId, "DuplicateId"},
    {Errc::UnknownEndpoint, "UnknownEndpoint"},
    {Errc::UnknownApplication, "UnknownApplication"},
    {Errc::NoQuantumPath, "NoQuantumPath"},
    {Errc::InfeasibleLevel, "InfeasibleLevel"},
    {Errc::ParticipantUnreachable, "ParticipantUnreachable"},
    {Errc::UnknownSession, "UnknownSession"},
    {Errc::NotYetDerived, "NotYetDerived"},
    {Errc::WrongCaller, "WrongCaller"},
    {Errc::AlreadyDelivered, "AlreadyDelivered"},
    {Errc::RoleKindMismatch, "RoleKindMismatch"},
    {Errc::LocalKmsUnavailable, "LocalKmsUnavailable"},
    {Errc::ControllerUnreachable, "ControllerUnreachable"},
    {Errc::DerivationFailed, "DerivationFailed"},
    {Errc::ParseError, "ParseError"},
    {Errc::ValidationError, "ValidationError"},
    {Errc::AssignmentMismatch, "AssignmentMismatch"},
    {Errc::KeyMismatch, "KeyMismatch"},
    {Errc::NoSamples, "NoSamples"},
    {Errc::InvalidRequest, "InvalidRequest"},
    {Errc::ServiceUnavailable, "ServiceUnavailable"},
}};
}  // namespace

const char* errc_name(Errc c) {
  for (const auto& [code, name] : kNames)
    if (code == c) return name;
  return "Internal";
}

std::optional<Errc> errc_from_name(const std::string& name) {
  for (const auto& [code, n] : kNames)
    if (name == n) return code;
  if (name == "Internal") return Errc::Internal;
  return std::nullopt;
}

}  // namespace qsnet
