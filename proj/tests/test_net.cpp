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

#include <doctest.h>
#include <httplib.h>

#include <string>

#include "qsnet/bytes.hpp"
#include "qsnet/errors.hpp"
#include "qsnet/harness.hpp"
#include "support/testutil.hpp"

using namespace qsnet;
using nlohmann::json;
using qsnet::test::code_of;

namespace {

TopologyConfig fig2_config() {
  return load_topology_config(std::string(QSNET_CONFIG_DIR) + "/fig2.json");
}

}  // namespace

TEST_CASE("all four levels run over loopback http") {
  Testbed bed(fig2_config(), RunMode::NET);
  const char* cases[] = {"T1", "T2", "T3", "T4"};
  const SecurityLevel levels[] = {SecurityLevel::L1, SecurityLevel::L2,
                                  SecurityLevel::L3, SecurityLevel::L4};
  for (int i = 0; i < 4; ++i) {
    CAPTURE(cases[i]);
    CaseResult r = bed.run_case(cases[i]);
    CHECK(r.level == levels[i]);
    CHECK(r.initiator.side == Side::INITIATOR);
    CHECK(r.target.side == Side::TARGET);
    CHECK(r.initiator.session_id == r.target.session_id);
    CHECK(r.initiator.t_e2e_ms > 0.0);
    CHECK(r.initiator.t_e2e_ms < 1000.0);
    CHECK(r.target.t_e2e_ms < 1000.0);
    // Every phase fits inside the end-to-end figure.
    CHECK(r.initiator.t_assignment_ms <= r.initiator.t_e2e_ms);
    CHECK(r.initiator.t_configuration_ms <= r.initiator.t_e2e_ms);
    CHECK(r.initiator.t_derivation_ms <= r.initiator.t_e2e_ms);
    CHECK(r.initiator.t_delivery_ms <= r.initiator.t_e2e_ms);
  }
}

TEST_CASE("kms speaks the etsi-shaped delivery interface over http") {
  Testbed bed(fig2_config(), RunMode::NET);
  auto kms_e = bed.factory()->kms(bed.host("KMS_E")->endpoint());
  auto kms_f = bed.factory()->kms(bed.host("KMS_F")->endpoint());

  KmsStatus st0 = kms_e->status("F");
  CHECK(st0.link_up);
  CHECK(st0.key_size_bits == 256);
  REQUIRE(st0.stored_key_count >= 2);

  auto got = kms_e->get_key("probe", "F", 2, 256);
  REQUIRE(got.size() == 2);
  CHECK(got[0].key.size() == 32);
  CHECK(got[1].key.size() == 32);
  CHECK(got[0].key_id != got[1].key_id);
  CHECK(kms_e->status("F").stored_key_count == st0.stored_key_count - 2);

  // The peer side serves the very same key material by id.
  auto peer = kms_f->get_key_with_id("probe", {got[0].key_id, got[1].key_id});
  REQUIRE(peer.size() == 2);
  CHECK(peer[0].key == got[0].key);
  CHECK(peer[1].key == got[1].key);

  CHECK(code_of([&] { kms_e->get_key("probe", "Z", 1, 256); }) == Errc::UnknownLink);
  CHECK(code_of([&] { kms_e->get_key_with_id("probe", {"no-such-id"}); }) ==
        Errc::UnknownKeyId);
  CHECK(code_of([&] { kms_e->get_key("probe", "F", 1, 128); }) ==
        Errc::SizeUnavailable);
}

TEST_CASE("typed errors cross the wire with their cause") {
  Testbed bed(fig2_config(), RunMode::NET);

  auto qusec = bed.factory()->qusec(bed.host("qusec")->endpoint());
  CHECK(code_of([&] { qusec->security_level_request("APP_A", "APP_NOPE"); }) ==
        Errc::UnknownApplication);

  auto vkms_f = bed.factory()->vkms(bed.host("vkms_F")->endpoint());
  CHECK(code_of([&] {
          vkms_f->session_message("no-such-session", "confirm", json::object());
        }) == Errc::UnknownSession);

  // A derivation failure inside a remote vKMS arrives with its cause intact.
  bed.kms("KMS_E").set_link_up(make_link_id("E", "F"), false);
  Errc got = Errc::Internal;
  Errc cause = Errc::Internal;
  try {
    bed.app_client("E").app_get_key("APP_E", "APP_F", 256);
    FAIL("expected the derivation to fail");
  } catch (const Error& e) {
    got = e.code();
    cause = e.cause().value_or(Errc::Internal);
  }
  CHECK(got == Errc::DerivationFailed);
  CHECK(cause == Errc::ServiceUnavailable);

  bed.kms("KMS_E").set_link_up(make_link_id("E", "F"), true);
  CHECK(bed.app_client("E").app_get_key("APP_E", "APP_F", 256).level ==
        SecurityLevel::L1);
}

TEST_CASE("raw http requests see the documented wire shape") {
  Testbed bed(fig2_config(), RunMode::NET);

  SUBCASE("kms key delivery") {
    httplib::Client cli(bed.host("KMS_E")->endpoint());

    auto health = cli.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);

    auto st = cli.Get("/api/v1/keys/F/status");
    REQUIRE(st);
    REQUIRE(st->status == 200);
    json stj = json::parse(st->body);
    CHECK(stj.at("stored_key_count").is_number());
    CHECK(stj.at("key_size").get<int>() == 256);
    CHECK(stj.at("link_up").get<bool>());

    json req = {{"caller", "probe"}, {"number", 1}, {"size", 256}};
    auto enc = cli.Post("/api/v1/keys/F/enc_keys", req.dump(), "application/json");
    REQUIRE(enc);
    REQUIRE(enc->status == 200);
    json keys = json::parse(enc->body).at("keys");
    REQUIRE(keys.size() == 1);
    CHECK(!keys[0].at("key_ID").get<std::string>().empty());
    CHECK(from_base64(keys[0].at("key").get<std::string>()).size() == 32);

    json bad = {{"caller", "probe"}, {"number", 1}, {"size", 256}};
    auto err = cli.Post("/api/v1/keys/Z/enc_keys", bad.dump(), "application/json");
    REQUIRE(err);
    CHECK(err->status == 400);
    json ebody = json::parse(err->body);
    CHECK(ebody.at("error").get<std::string>() == "UnknownLink");
    CHECK(!ebody.at("message").get<std::string>().empty());
  }

  SUBCASE("application key delivery end to end") {
    httplib::Client init(bed.host("vkms_E")->endpoint());
    json req = {{"caller", "APP_E"}, {"size", 256}};
    auto r = init.Post("/api/v1/keys/APP_F/enc_keys", req.dump(), "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 200);
    json body = json::parse(r->body);
    CHECK(body.at("level").get<std::string>() == "L1");
    CHECK(body.at("timings").at("t_e2e_ms").get<double>() > 0.0);
    std::string key_id = body.at("keys").at(0).at("key_ID").get<std::string>();
    std::string key_b64 = body.at("keys").at(0).at("key").get<std::string>();
    CHECK(from_base64(key_b64).size() == 32);

    httplib::Client tgt(bed.host("vkms_F")->endpoint());
    json pick = {{"key_IDs", json::array({{{"key_ID", key_id}}})}};
    auto p = tgt.Post("/api/v1/keys/APP_F/dec_keys", pick.dump(), "application/json");
    REQUIRE(p);
    REQUIRE(p->status == 200);
    json pbody = json::parse(p->body);
    CHECK(pbody.at("keys").at(0).at("key").get<std::string>() == key_b64);

    auto again = tgt.Post("/api/v1/keys/APP_F/dec_keys", pick.dump(), "application/json");
    REQUIRE(again);
    CHECK(again->status == 400);
    CHECK(json::parse(again->body).at("error").get<std::string>() == "AlreadyDelivered");
  }

  SUBCASE("malformed and unroutable requests") {
    httplib::Client cli(bed.host("vkms_F")->endpoint());
    auto r = cli.Post("/session_message", "{not json", "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    CHECK(json::parse(r->body).at("error").get<std::string>() == "ParseError");

    auto missing = cli.Get("/no/such/route");
    REQUIRE(missing);
    CHECK(missing->status == 404);
  }

  SUBCASE("service failures map to 503") {
    bed.kms("KMS_E").set_link_up(make_link_id("E", "F"), false);
    httplib::Client cli(bed.host("KMS_E")->endpoint());
    json req = {{"caller", "probe"}, {"number", 1}, {"size", 256}};
    auto r = cli.Post("/api/v1/keys/F/enc_keys", req.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 503);
    CHECK(json::parse(r->body).at("error").get<std::string>() == "ServiceUnavailable");
    bed.kms("KMS_E").set_link_up(make_link_id("E", "F"), true);
  }
}

TEST_CASE("stopped hosts surface as typed unreachability") {
  SUBCASE("controller down") {
    Testbed bed(fig2_config(), RunMode::NET);
    bed.host("qusec")->stop();
    CHECK(code_of([&] { bed.app_client("E").app_get_key("APP_E", "APP_F", 256); }) ==
          Errc::ControllerUnreachable);
  }

  SUBCASE("participant down") {
    Testbed bed(fig2_config(), RunMode::NET);
    bed.host("vkms_F")->stop();
    Errc got = Errc::Internal;
    Errc cause = Errc::Internal;
    try {
      bed.app_client("E").app_get_key("APP_E", "APP_F", 256);
      FAIL("expected configuration to fail");
    } catch (const Error& e) {
      got = e.code();
      cause = e.cause().value_or(Errc::Internal);
    }
    CHECK(got == Errc::ParticipantUnreachable);
    CHECK(cause == Errc::ServiceUnavailable);
  }
}
