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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

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

PhaseTimings mk_timings(Side side, double assignment, double configuration,
                        double derivation, double delivery) {
  PhaseTimings t;
  t.session_id = "s";
  t.level = SecurityLevel::L1;
  t.side = side;
  t.t_assignment_ms = assignment;
  t.t_configuration_ms = configuration;
  t.t_derivation_ms = derivation;
  t.t_delivery_ms = delivery;
  t.t_e2e_ms = assignment + configuration + derivation + delivery;
  return t;
}

CaseResult mk_result(const std::string& case_id, double base) {
  CaseResult r;
  r.case_id = case_id;
  r.session_id = "sess-" + case_id;
  r.level = SecurityLevel::L1;
  r.key_id = "key-" + case_id;
  r.initiator = mk_timings(Side::INITIATOR, base, base * 2, base * 3, base * 4);
  r.target = mk_timings(Side::TARGET, 0, 0, 0, base);
  return r;
}

}  // namespace

TEST_CASE("the reference topology file describes the validation matrix") {
  TopologyConfig cfg = fig2_config();
  CHECK(cfg.name == "fig2");
  REQUIRE(cfg.nodes.size() == 6);
  REQUIRE(cfg.links.size() == 2);
  REQUIRE(cfg.cases.size() == 4);

  int qn = 0, cn = 0;
  for (const auto& n : cfg.nodes) (n.kind == NodeKind::QN ? qn : cn)++;
  CHECK(qn == 3);
  CHECK(cn == 3);

  const SecurityLevel expect[] = {SecurityLevel::L1, SecurityLevel::L2,
                                  SecurityLevel::L3, SecurityLevel::L4};
  for (int i = 0; i < 4; ++i) {
    const CaseSpec& c = cfg.case_by_id("T" + std::to_string(i + 1));
    CHECK(c.expected_level == expect[i]);
    CHECK(c.check_level);
  }
  CHECK(cfg.defaults.kem_suite == KemSuiteId::ML_KEM_768);
  CHECK(cfg.defaults.out_len_bits == 256);
  CHECK_FALSE(cfg.defaults.dual_kem);

  CHECK(code_of([&] { cfg.case_by_id("T9"); }) == Errc::ValidationError);
}

TEST_CASE("topology config survives a json round trip") {
  TopologyConfig cfg = fig2_config();
  json j = cfg;
  TopologyConfig back = j.get<TopologyConfig>();

  CHECK(back.name == cfg.name);
  REQUIRE(back.nodes.size() == cfg.nodes.size());
  REQUIRE(back.links.size() == cfg.links.size());
  REQUIRE(back.cases.size() == cfg.cases.size());
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    CHECK(back.nodes[i].node_id == cfg.nodes[i].node_id);
    CHECK(back.nodes[i].kind == cfg.nodes[i].kind);
    CHECK(back.nodes[i].hosted_apps == cfg.nodes[i].hosted_apps);
  }
  for (std::size_t i = 0; i < cfg.links.size(); ++i) {
    CHECK(back.links[i].endpoint_a == cfg.links[i].endpoint_a);
    CHECK(back.links[i].endpoint_b == cfg.links[i].endpoint_b);
    CHECK(back.links[i].seed == cfg.links[i].seed);
    CHECK(back.links[i].key_size_bits == cfg.links[i].key_size_bits);
  }
  for (std::size_t i = 0; i < cfg.cases.size(); ++i) {
    CHECK(back.cases[i].id == cfg.cases[i].id);
    CHECK(back.cases[i].initiator_app == cfg.cases[i].initiator_app);
    CHECK(back.cases[i].target_app == cfg.cases[i].target_app);
    CHECK(back.cases[i].expected_level == cfg.cases[i].expected_level);
    CHECK(back.cases[i].check_level == cfg.cases[i].check_level);
  }
  CHECK(back.defaults.kem_suite == cfg.defaults.kem_suite);
  CHECK(back.defaults.prefill_keys == cfg.defaults.prefill_keys);

  // A case without an expected level stays unchecked; absent defaults fall
  // back to the built-in ones.
  json minimal = {
      {"name", "mini"},
      {"nodes", json::array()},
      {"links", json::array()},
      {"cases", json::array({{{"id", "C1"}, {"initiator", "a"}, {"target", "b"}}})},
  };
  TopologyConfig m = minimal.get<TopologyConfig>();
  CHECK_FALSE(m.cases[0].check_level);
  CHECK(m.defaults.out_len_bits == 256);
  CHECK(m.defaults.prefill_keys == 32);
}

TEST_CASE("run mode names parse both ways") {
  CHECK(run_mode_from_name("inproc") == RunMode::INPROC);
  CHECK(run_mode_from_name("net") == RunMode::NET);
  CHECK(std::string(run_mode_name(RunMode::INPROC)) == "inproc");
  CHECK(std::string(run_mode_name(RunMode::NET)) == "net");
  CHECK(code_of([] { run_mode_from_name("carrier-pigeon"); }) == Errc::ParseError);
}

TEST_CASE("nearest-rank percentile") {
  CHECK(code_of([] { percentile({}, 50); }) == Errc::NoSamples);

  CHECK(percentile({42.0}, 0) == 42.0);
  CHECK(percentile({42.0}, 50) == 42.0);
  CHECK(percentile({42.0}, 100) == 42.0);

  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(static_cast<double>(i));
  CHECK(percentile(v, 0) == 1.0);
  CHECK(percentile(v, 25) == 25.0);
  CHECK(percentile(v, 50) == 50.0);
  CHECK(percentile(v, 99) == 99.0);
  CHECK(percentile(v, 100) == 100.0);

  CHECK(percentile({3.0, 1.0}, 50) == 1.0);
  CHECK(percentile({3.0, 1.0}, 75) == 3.0);
}

TEST_CASE("latency report aggregates per case, side, and phase") {
  LatencyReport rep;
  CHECK(rep.sample_count() == 0);
  CHECK(code_of([&] { rep.summary(); }) == Errc::NoSamples);

  rep.add(mk_result("T1", 1.0));
  rep.add(mk_result("T1", 3.0));
  rep.add(mk_result("T2", 2.0));
  CHECK(rep.sample_count() == 3);

  json s = rep.summary();
  REQUIRE(s.contains("T1"));
  REQUIRE(s.contains("T2"));
  CHECK(s["T1"]["level"] == "L1");

  const json& t1a = s["T1"]["initiator"]["assignment"];
  CHECK(t1a["count"] == 2);
  CHECK(t1a["min_ms"].get<double>() == 1.0);
  CHECK(t1a["max_ms"].get<double>() == 3.0);
  CHECK(t1a["mean_ms"].get<double>() == doctest::Approx(2.0));

  const json& t1e = s["T1"]["initiator"]["e2e"];
  CHECK(t1e["min_ms"].get<double>() == 10.0);
  CHECK(t1e["max_ms"].get<double>() == 30.0);

  const json& t1t = s["T1"]["target"];
  CHECK(t1t.contains("delivery"));
  CHECK(t1t.contains("e2e"));
  CHECK(t1t["delivery"]["max_ms"].get<double>() == 3.0);

  // CSV: header plus one row per side per sample.
  std::istringstream csv(rep.csv());
  std::string line;
  std::getline(csv, line);
  CHECK(line ==
        "case_id,session_id,level,side,assignment_ms,configuration_ms,"
        "derivation_ms,delivery_ms,e2e_ms");
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("latency report writes a parseable report directory") {
  LatencyReport rep;
  rep.add(mk_result("T1", 1.0));
  rep.add(mk_result("T2", 2.0));

  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "qsnet-report-test";
  std::filesystem::remove_all(dir);
  rep.write(dir.string(), {{"mode", "inproc"}, {"iterations", 1}});

  std::ifstream rj(dir / "report.json");
  REQUIRE(rj.good());
  json report = json::parse(rj);
  CHECK(report["run"]["mode"] == "inproc");
  CHECK(report["sample_count"] == 2);
  CHECK(report["summary"].contains("T1"));
  CHECK(report["summary"].contains("T2"));

  std::ifstream cs(dir / "samples.csv");
  REQUIRE(cs.good());
  int lines = 0;
  std::string line;
  while (std::getline(cs, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 1 + 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_case enforces the expected level and valid case ids") {
  Testbed bed(fig2_config(), RunMode::INPROC);

  CaseSpec wrong;
  wrong.id = "W1";
  wrong.initiator_app = "APP_E";
  wrong.target_app = "APP_F";
  wrong.expected_level = SecurityLevel::L4;
  wrong.check_level = true;
  CHECK(code_of([&] { bed.run_case(wrong); }) == Errc::AssignmentMismatch);

  CHECK(code_of([&] { bed.run_case("T9"); }) == Errc::ValidationError);

  CHECK(bed.node_of_app("APP_E") == "E");
  CHECK(code_of([&] { bed.node_of_app("APP_NOPE"); }) == Errc::UnknownApplication);
  CHECK(code_of([&] { bed.vkms("Z"); }) == Errc::UnknownEndpoint);
  CHECK(code_of([&] { bed.kms("KMS_Z"); }) == Errc::UnknownEndpoint);
  CHECK(code_of([&] { bed.app_client("Z"); }) == Errc::UnknownEndpoint);
  CHECK(bed.hub() != nullptr);
  CHECK(bed.host("qusec") == nullptr);
}

TEST_CASE("testbed rejects malformed topologies") {
  TopologyConfig cfg = fig2_config();
  cfg.links.push_back({"", "E", "Z", 256, 1.0, 9});
  CHECK(code_of([&] { Testbed bed(cfg, RunMode::INPROC); }) == Errc::ValidationError);

  TopologyConfig cn_link = fig2_config();
  cn_link.links.push_back({"", "A", "E", 256, 1.0, 9});
  CHECK(code_of([&] { Testbed bed(cn_link, RunMode::INPROC); }) ==
        Errc::ValidationError);

  TopologyConfig self_link = fig2_config();
  self_link.links.push_back({"", "E", "E", 256, 1.0, 9});
  CHECK_THROWS_AS(Testbed(self_link, RunMode::INPROC), Error);

  CHECK(code_of([] { load_topology_config("/no/such/file.json"); }) ==
        Errc::ParseError);
}
