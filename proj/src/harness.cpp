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

#include "qsnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "qsnet/errors.hpp"

namespace qsnet {

using nlohmann::json;

const char* run_mode_name(RunMode m) {
  return m == RunMode::INPROC ? "inproc" : "net";
}

RunMode run_mode_from_name(const std::string& s) {
  if (s == "inproc") return RunMode::INPROC;
  if (s == "net") return RunMode::NET;
  throw Error(Errc::ParseError, "unknown run mode: " + s);
}

const CaseSpec& TopologyConfig::case_by_id(const std::string& id) const {
  for (const auto& c : cases)
    if (c.id == id) return c;
  throw Error(Errc::ValidationError, "no case named " + id);
}

void to_json(json& j, const TopologyConfig& c) {
  json cases = json::array();
  for (const auto& cs : c.cases) {
    json e = {{"id", cs.id},
              {"initiator", cs.initiator_app},
              {"target", cs.target_app}};
    if (cs.check_level) e["expected_level"] = level_name(cs.expected_level);
    cases.push_back(e);
  }
  j = {{"name", c.name},
       {"defaults",
        {{"kem_suite", kem_suite_name(c.defaults.kem_suite)},
         {"dual_kem", c.defaults.dual_kem},
         {"out_len_bits", c.defaults.out_len_bits},
         {"prefill_keys", c.defaults.prefill_keys}}},
       {"nodes", c.nodes},
       {"links", c.links},
       {"cases", cases}};
}

void from_json(const json& j, TopologyConfig& c) {
  c = TopologyConfig{};
  c.name = j.value("name", "");
  if (j.contains("defaults")) {
    const json& d = j.at("defaults");
    if (d.contains("kem_suite"))
      c.defaults.kem_suite =
          kem_suite_from_name(d.at("kem_suite").get<std::string>());
    c.defaults.dual_kem = d.value("dual_kem", false);
    c.defaults.out_len_bits = d.value("out_len_bits", std::size_t{256});
    c.defaults.prefill_keys = d.value("prefill_keys", std::size_t{32});
  }
  const json nodes = j.value("nodes", json::array());
  for (const auto& n : nodes) c.nodes.push_back(n.get<NodeDescriptor>());
  const json links = j.value("links", json::array());
  for (const auto& l : links) c.links.push_back(l.get<QkdLinkInfo>());
  const json cases = j.value("cases", json::array());
  for (const auto& e : cases) {
    CaseSpec cs;
    cs.id = e.at("id").get<std::string>();
    cs.initiator_app = e.at("initiator").get<std::string>();
    cs.target_app = e.at("target").get<std::string>();
    if (e.contains("expected_level")) {
      cs.expected_level =
          level_from_name(e.at("expected_level").get<std::string>());
      cs.check_level = true;
    }
    c.cases.push_back(cs);
  }
}

TopologyConfig load_topology_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path);
  try {
    json j;
    in >> j;
    return j.get<TopologyConfig>();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
}

Testbed::Testbed(TopologyConfig cfg, RunMode mode, int base_port)
    : cfg_(std::move(cfg)), mode_(mode), base_port_(base_port) {
  build();
}

Testbed::~Testbed() {
  for (auto& [id, h] : hosts_) h->stop();
}

void Testbed::build() {
  for (auto& n : cfg_.nodes) {
    if (n.kind == NodeKind::QN && n.kms_ids.empty())
      n.kms_ids = {"KMS_" + n.node_id};
    if (n.kind == NodeKind::CN) {
      n.kms_ids.clear();
      n.kms_endpoints.clear();
    }
    for (const auto& app : n.hosted_apps) app_node_[app] = n.node_id;
  }
  for (auto& l : cfg_.links)
    if (l.link_id.empty()) l.link_id = make_link_id(l.endpoint_a, l.endpoint_b);

  // Endpoint assignment. In NET mode ports are bound up front (before any
  // routes exist) so the descriptors can carry final addresses.
  std::string qusec_ep;
  std::map<std::string, std::string> kms_ep;
  std::map<std::string, std::string> vkms_ep;
  if (mode_ == RunMode::INPROC) {
    hub_ = std::make_shared<InprocHub>();
    factory_ = hub_->factory();
    qusec_ep = InprocHub::endpoint_of("qusec");
    for (const auto& n : cfg_.nodes) {
      vkms_ep[n.node_id] = InprocHub::endpoint_of("vkms_" + n.node_id);
      for (const auto& kid : n.kms_ids) kms_ep[kid] = InprocHub::endpoint_of(kid);
    }
  } else {
    factory_ = std::make_shared<HttpClientFactory>();
    int next_port = base_port_;
    auto bind_host = [&](const std::string& id) -> HttpHost* {
      auto h = std::make_unique<HttpHost>();
      h->bind(base_port_ == 0 ? 0 : next_port++);
      HttpHost* p = h.get();
      hosts_[id] = std::move(h);
      return p;
    };
    qusec_ep = bind_host("qusec")->endpoint();
    for (const auto& n : cfg_.nodes) {
      vkms_ep[n.node_id] = bind_host("vkms_" + n.node_id)->endpoint();
      for (const auto& kid : n.kms_ids) kms_ep[kid] = bind_host(kid)->endpoint();
    }
  }

  for (auto& n : cfg_.nodes) {
    n.vkms_endpoint = vkms_ep[n.node_id];
    n.kms_endpoints.clear();
    for (const auto& kid : n.kms_ids) n.kms_endpoints.push_back(kms_ep[kid]);
  }

  QusecConfig qc;
  qc.kem_suite = cfg_.defaults.kem_suite;
  qc.dual_kem = cfg_.defaults.dual_kem;
  qusec_ = std::make_shared<Qusec>(factory_, qc);

  for (const auto& n : cfg_.nodes) {
    for (std::size_t i = 0; i < n.kms_ids.size(); ++i) {
      auto k = std::make_shared<KmsService>(n.kms_ids[i], n.node_id);
      k->set_refill(fabric_.refill_hook());
      k->set_forwarder(
          [f = factory_](const std::string& ep, const RelayEnvelope& env) {
            f->kms(ep)->forward_relayed_key(env);
          });
      kms_[n.kms_ids[i]] = std::move(k);
    }
    VkmsConfig vc;
    vc.node_id = n.node_id;
    vc.kind = n.kind;
    vc.hosted_apps = n.hosted_apps;
    vc.kms_id = n.kms_ids.empty() ? "" : n.kms_ids.front();
    vc.kms_endpoint = n.kms_endpoints.empty() ? "" : n.kms_endpoints.front();
    vc.qusec_endpoint = qusec_ep;
    vc.self_endpoint = vkms_ep[n.node_id];
    vkms_[n.node_id] = std::make_shared<Vkms>(vc, factory_);
  }

  for (const auto& l : cfg_.links) {
    const NodeDescriptor* a = nullptr;
    const NodeDescriptor* b = nullptr;
    for (const auto& n : cfg_.nodes) {
      if (n.node_id == l.endpoint_a) a = &n;
      if (n.node_id == l.endpoint_b) b = &n;
    }
    if (!a || !b)
      throw Error(Errc::ValidationError,
                  "link " + l.link_id + " references an unknown node");
    if (a->kms_ids.empty() || b->kms_ids.empty())
      throw Error(Errc::ValidationError,
                  "link " + l.link_id + " endpoint is not a QN");
    fabric_.register_link(l, kms_[a->kms_ids.front()].get(),
                          kms_[b->kms_ids.front()].get());
    if (cfg_.defaults.prefill_keys > 0)
      fabric_.fill_stores(l.link_id, cfg_.defaults.prefill_keys);
  }

  if (mode_ == RunMode::INPROC) {
    hub_->add_qusec("qusec", qusec_);
    for (const auto& [kid, k] : kms_) hub_->add_kms(kid, k);
    for (const auto& [nid, v] : vkms_) {
      hub_->add_vkms("vkms_" + nid, v);
      apps_[nid] = v;
    }
  } else {
    hosts_.at("qusec")->serve_qusec(*qusec_);
    hosts_.at("qusec")->listen();
    for (const auto& [kid, k] : kms_) {
      hosts_.at(kid)->serve_kms(*k);
      hosts_.at(kid)->listen();
    }
    for (const auto& [nid, v] : vkms_) {
      hosts_.at("vkms_" + nid)->serve_vkms(*v);
      hosts_.at("vkms_" + nid)->listen();
      apps_[nid] = make_http_app_client(vkms_ep[nid]);
    }
  }

  auto ctrl = factory_->qusec(qusec_ep);
  for (const auto& n : cfg_.nodes) ctrl->register_node(n);
  for (const auto& l : cfg_.links) ctrl->register_link(l);
}

Vkms& Testbed::vkms(const std::string& node_id) {
  auto it = vkms_.find(node_id);
  if (it == vkms_.end())
    throw Error(Errc::UnknownEndpoint, "no vKMS on node " + node_id);
  return *it->second;
}

KmsService& Testbed::kms(const std::string& kms_id) {
  auto it = kms_.find(kms_id);
  if (it == kms_.end())
    throw Error(Errc::UnknownEndpoint, "no KMS named " + kms_id);
  return *it->second;
}

HttpHost* Testbed::host(const std::string& service_id) {
  auto it = hosts_.find(service_id);
  return it == hosts_.end() ? nullptr : it->second.get();
}

VkmsAppClient& Testbed::app_client(const std::string& node_id) {
  auto it = apps_.find(node_id);
  if (it == apps_.end())
    throw Error(Errc::UnknownEndpoint, "no app client for node " + node_id);
  return *it->second;
}

std::string Testbed::node_of_app(const std::string& app) const {
  auto it = app_node_.find(app);
  if (it == app_node_.end())
    throw Error(Errc::UnknownApplication, "no node hosts " + app);
  return it->second;
}

CaseResult Testbed::run_case(const CaseSpec& c) {
  std::string init_node = node_of_app(c.initiator_app);
  std::string tgt_node = node_of_app(c.target_app);
  AppKeyResult a = app_client(init_node)
                       .app_get_key(c.initiator_app, c.target_app,
                                    cfg_.defaults.out_len_bits);
  if (c.check_level && a.level != c.expected_level)
    throw Error(Errc::AssignmentMismatch,
                "case " + c.id + ": expected " +
                    std::string(level_name(c.expected_level)) + ", assigned " +
                    level_name(a.level));
  AppKeyResult b =
      app_client(tgt_node).app_get_key_with_id(c.target_app, a.key_id);
  if (!(a.key == b.key))
    throw Error(Errc::KeyMismatch, "case " + c.id + ": endpoint keys differ");
  if (a.level != b.level)
    throw Error(Errc::AssignmentMismatch,
                "case " + c.id + ": sides disagree on the level");
  CaseResult r;
  r.case_id = c.id;
  r.session_id = a.timings.session_id;
  r.level = a.level;
  r.key_id = a.key_id;
  r.initiator = a.timings;
  r.target = b.timings;
  return r;
}

CaseResult Testbed::run_case(const std::string& case_id) {
  return run_case(cfg_.case_by_id(case_id));
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw Error(Errc::NoSamples, "percentile of an empty set");
  std::sort(v.begin(), v.end());
  if (p <= 0.0) return v.front();
  if (p >= 100.0) return v.back();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * v.size()));
  if (rank == 0) rank = 1;
  return v[rank - 1];
}

namespace {

struct PhaseRef {
  const char* name;
  double PhaseTimings::*field;
};

constexpr PhaseRef kPhases[] = {
    {"assignment", &PhaseTimings::t_assignment_ms},
    {"configuration", &PhaseTimings::t_configuration_ms},
    {"derivation", &PhaseTimings::t_derivation_ms},
    {"delivery", &PhaseTimings::t_delivery_ms},
    {"e2e", &PhaseTimings::t_e2e_ms},
};

json stats_of(const std::vector<double>& xs) {
  if (xs.empty()) throw Error(Errc::NoSamples, "no samples for phase");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return json{{"count", xs.size()},       {"mean_ms", sum / xs.size()},
              {"min_ms", percentile(xs, 0)},  {"p25_ms", percentile(xs, 25)},
              {"p50_ms", percentile(xs, 50)}, {"p75_ms", percentile(xs, 75)},
              {"p99_ms", percentile(xs, 99)}, {"max_ms", percentile(xs, 100)}};
}

}  // namespace

void LatencyReport::add(const CaseResult& r) { samples_.push_back(r); }

json LatencyReport::summary() const {
  if (samples_.empty())
    throw Error(Errc::NoSamples, "no case results recorded");
  std::map<std::string,
           std::map<std::string, std::map<std::string, std::vector<double>>>>
      acc;
  std::map<std::string, SecurityLevel> levels;
  for (const auto& r : samples_) {
    levels[r.case_id] = r.level;
    for (const auto& ph : kPhases)
      acc[r.case_id]["initiator"][ph.name].push_back(r.initiator.*(ph.field));
    // The target side only observes pickup and end-to-end.
    acc[r.case_id]["target"]["delivery"].push_back(r.target.t_delivery_ms);
    acc[r.case_id]["target"]["e2e"].push_back(r.target.t_e2e_ms);
  }
  json out = json::object();
  for (const auto& [cid, sides] : acc) {
    json jc = json::object();
    jc["level"] = level_name(levels[cid]);
    for (const auto& [side, phases] : sides) {
      json jp = json::object();
      for (const auto& [phase, xs] : phases) jp[phase] = stats_of(xs);
      jc[side] = jp;
    }
    out[cid] = jc;
  }
  return out;
}

std::string LatencyReport::csv() const {
  std::ostringstream os;
  os << "case_id,session_id,level,side,assignment_ms,configuration_ms,"
        "derivation_ms,delivery_ms,e2e_ms\n";
  auto row = [&os](const CaseResult& r, const PhaseTimings& t) {
    os << r.case_id << ',' << r.session_id << ',' << level_name(r.level) << ','
       << side_name(t.side) << ',' << t.t_assignment_ms << ','
       << t.t_configuration_ms << ',' << t.t_derivation_ms << ','
       << t.t_delivery_ms << ',' << t.t_e2e_ms << '\n';
  };
  for (const auto& r : samples_) {
    row(r, r.initiator);
    row(r, r.target);
  }
  return os.str();
}

void LatencyReport::write(const std::string& out_dir,
                          const json& run_info) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  json report = {{"run", run_info},
                 {"sample_count", sample_count()},
                 {"summary", summary()}};
  fs::path dir(out_dir);
  std::ofstream jf(dir / "report.json");
  if (!jf) throw Error(Errc::Internal, "cannot write report.json in " + out_dir);
  jf << report.dump(2) << '\n';
  std::ofstream cf(dir / "samples.csv");
  if (!cf) throw Error(Errc::Internal, "cannot write samples.csv in " + out_dir);
  cf << csv();
}

}  // namespace qsnet
