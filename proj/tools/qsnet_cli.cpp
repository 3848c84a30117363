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

#include <cstddef>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsnet/errors.hpp"
#include "qsnet/harness.hpp"

namespace {

int run_command(const std::string& topology_path,
                const std::vector<std::string>& case_ids, std::size_t iterations,
                const std::string& mode_name, const std::string& report_dir,
                int base_port, std::size_t out_len_bits) {
  using namespace qsnet;

  TopologyConfig cfg = load_topology_config(topology_path);
  if (out_len_bits > 0) cfg.defaults.out_len_bits = out_len_bits;
  RunMode mode = run_mode_from_name(mode_name);

  std::vector<CaseSpec> selected;
  if (case_ids.empty() ||
      (case_ids.size() == 1 && case_ids.front() == "all")) {
    selected = cfg.cases;
  } else {
    for (const auto& id : case_ids) selected.push_back(cfg.case_by_id(id));
  }
  if (selected.empty()) {
    std::cerr << "error: the topology defines no cases and none were given\n";
    return 2;
  }

  Testbed bed(cfg, mode, base_port);
  std::cout << "topology " << cfg.name << " (" << cfg.nodes.size()
            << " nodes, " << cfg.links.size() << " links), mode "
            << run_mode_name(mode) << ", " << iterations
            << " iteration(s) per case\n";

  LatencyReport report;
  for (const auto& c : selected) {
    for (std::size_t i = 0; i < iterations; ++i) {
      CaseResult r = bed.run_case(c);
      report.add(r);
    }
  }

  nlohmann::json summary = report.summary();
  for (const auto& c : selected) {
    const nlohmann::json& jc = summary.at(c.id);
    const nlohmann::json& ji = jc.at("initiator");
    std::cout << "  " << c.id << "  " << jc.at("level").get<std::string>()
              << "  n=" << ji.at("e2e").at("count").get<std::size_t>()
              << "  medians(ms): assign "
              << ji.at("assignment").at("p50_ms").get<double>() << ", config "
              << ji.at("configuration").at("p50_ms").get<double>()
              << ", derive " << ji.at("derivation").at("p50_ms").get<double>()
              << ", deliver " << ji.at("delivery").at("p50_ms").get<double>()
              << ", e2e " << ji.at("e2e").at("p50_ms").get<double>() << "\n";
  }

  if (!report_dir.empty()) {
    nlohmann::json run_info = {{"topology", cfg.name},
                               {"mode", run_mode_name(mode)},
                               {"iterations", iterations},
                               {"out_len_bits", cfg.defaults.out_len_bits}};
    report.write(report_dir, run_info);
    std::cout << "report written to " << report_dir << "\n";
  }
  std::cout << "all " << report.sample_count() << " session(s) completed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive quantum-safe key establishment testbed"};
  app.require_subcommand(1);

  std::string topology_path;
  std::vector<std::string> case_ids;
  std::size_t iterations = 1;
  std::string mode_name = "inproc";
  std::string report_dir;
  int base_port = 0;
  std::size_t out_len_bits = 0;

  CLI::App* run = app.add_subcommand("run", "run validation cases end to end");
  run->add_option("--topology", topology_path,
                  "topology/case description (JSON)")
      ->required();
  run->add_option("--case", case_ids,
                  "case id to run (repeatable; default: all)");
  run->add_option("--iterations", iterations, "sessions per case")
      ->capture_default_str();
  run->add_option("--mode", mode_name, "inproc | net")
      ->capture_default_str()
      ->check(CLI::IsMember({"inproc", "net"}));
  run->add_option("--report", report_dir,
                  "directory for report.json and samples.csv");
  run->add_option("--base-port", base_port,
                  "first loopback port in net mode (0 = auto)");
  run->add_option("--out-len-bits", out_len_bits,
                  "override the configured session key length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(topology_path, case_ids, iterations, mode_name,
                         report_dir, base_port, out_len_bits);
  } catch (const qsnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
