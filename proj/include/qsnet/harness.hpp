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

// Validation harness: loads a topology/case description, assembles the full
// service stack (in-process or loopback HTTP), runs sessions end to end, and
// aggregates per-phase latency statistics.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsnet/clients.hpp"
#include "qsnet/http_api.hpp"
#include "qsnet/inproc.hpp"
#include "qsnet/kem.hpp"
#include "qsnet/kms.hpp"
#include "qsnet/qkd_sim.hpp"
#include "qsnet/qusec.hpp"
#include "qsnet/timings.hpp"
#include "qsnet/vkms.hpp"

namespace qsnet {

enum class RunMode { INPROC, NET };

const char* run_mode_name(RunMode m);
RunMode run_mode_from_name(const std::string& s);

struct CaseSpec {
  std::string id;
  std::string initiator_app;
  std::string target_app;
  SecurityLevel expected_level = SecurityLevel::L4;
  bool check_level = false;
};

struct TestbedDefaults {
  KemSuiteId kem_suite = KemSuiteId::ML_KEM_768;
  bool dual_kem = false;
  std::size_t out_len_bits = 256;
  std::size_t prefill_keys = 32;
};

/// Harness-level description of a deployment: nodes (endpoints left blank,
/// the testbed assigns them), QKD links, defaults, and named session cases.
struct TopologyConfig {
  std::string name;
  std::vector<NodeDescriptor> nodes;
  std::vector<QkdLinkInfo> links;
  TestbedDefaults defaults;
  std::vector<CaseSpec> cases;

  const CaseSpec& case_by_id(const std::string& id) const;
};

void to_json(nlohmann::json& j, const TopologyConfig& c);
void from_json(const nlohmann::json& j, TopologyConfig& c);
TopologyConfig load_topology_config(const std::string& path);

struct CaseResult {
  std::string case_id;
  std::string session_id;
  SecurityLevel level = SecurityLevel::L4;
  std::string key_id;
  PhaseTimings initiator;
  PhaseTimings target;
};

/// One controller, one KMS per quantum node, one vKMS per node, and the
/// pseudo-QKD plane, wired over the chosen transport. In NET mode every
/// service gets its own loopback HTTP host and all traffic is serialized.
class Testbed {
 public:
  Testbed(TopologyConfig cfg, RunMode mode, int base_port = 0);
  ~Testbed();
  Testbed(const Testbed&) = delete;
  Testbed& operator=(const Testbed&) = delete;

  /// Runs one session end to end: initiator-side key request, expected-level
  /// check, target-side pickup by key id, and key equality check.
  CaseResult run_case(const CaseSpec& c);
  CaseResult run_case(const std::string& case_id);

  const TopologyConfig& config() const { return cfg_; }
  RunMode mode() const { return mode_; }

  Qusec& qusec() { return *qusec_; }
  Vkms& vkms(const std::string& node_id);
  KmsService& kms(const std::string& kms_id);
  QkdFabric& fabric() { return fabric_; }
  std::shared_ptr<ClientFactory> factory() { return factory_; }
  /// Null in NET mode.
  InprocHub* hub() { return hub_.get(); }
  /// Null in INPROC mode. Service ids: "qusec", a KMS id, "vkms_<node>".
  HttpHost* host(const std::string& service_id);
  VkmsAppClient& app_client(const std::string& node_id);
  std::string node_of_app(const std::string& app) const;

 private:
  void build();

  TopologyConfig cfg_;
  RunMode mode_;
  int base_port_ = 0;
  QkdFabric fabric_;
  std::shared_ptr<InprocHub> hub_;
  std::shared_ptr<ClientFactory> factory_;
  std::shared_ptr<Qusec> qusec_;
  std::map<std::string, std::shared_ptr<KmsService>> kms_;
  std::map<std::string, std::shared_ptr<Vkms>> vkms_;
  std::map<std::string, std::shared_ptr<VkmsAppClient>> apps_;
  std::map<std::string, std::string> app_node_;
  std::map<std::string, std::unique_ptr<HttpHost>> hosts_;
};

/// Nearest-rank percentile over a sample set; p in [0, 100]. Throws
/// NoSamples when v is empty.
double percentile(std::vector<double> v, double p);

/// Collects case results and renders per-phase latency statistics.
class LatencyReport {
 public:
  void add(const CaseResult& r);

  std::size_t sample_count() const { return samples_.size(); }
  const std::vector<CaseResult>& samples() const { return samples_; }

  /// Per (case, side, phase) aggregates: count, mean, min, p25, p50, p75,
  /// p99, max. Throws NoSamples when no results were added.
  nlohmann::json summary() const;
  std::string csv() const;

  /// Writes report.json (run_info + summary) and samples.csv under out_dir,
  /// creating the directory when missing.
  void write(const std::string& out_dir, const nlohmann::json& run_info) const;

 private:
  std::vector<CaseResult> samples_;
};

}  // namespace qsnet
