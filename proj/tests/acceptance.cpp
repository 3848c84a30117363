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
 *
 * Acceptance gate: every release-blocking property of the framework, one
 * check per criterion, one PASS/FAIL line per criterion. Exits nonzero if
 * any criterion fails. Oracles here are computed independently of the
 * library code paths they verify wherever feasible.
 */

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsnet/bytes.hpp"
#include "qsnet/errors.hpp"
#include "qsnet/harness.hpp"
#include "qsnet/hash.hpp"
#include "qsnet/kdf.hpp"

namespace {

using namespace qsnet;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct CheckFail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& msg) {
  if (!cond) throw CheckFail(msg);
}

std::string fmt_ms(double ms) {
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << ms;
  return os.str();
}

TopologyConfig fig2() {
  return load_topology_config(std::string(QSNET_CONFIG_DIR) + "/fig2.json");
}

struct Caught {
  Errc code;
  std::optional<Errc> cause;
};

Caught expect_error(const std::function<void()>& op, const std::vector<Errc>& allowed,
                    const std::string& what) {
  try {
    op();
  } catch (const Error& e) {
    for (Errc c : allowed) {
      if (e.code() == c) return {e.code(), e.cause()};
    }
    throw CheckFail(what + ": unexpected error " + errc_name(e.code()));
  } catch (const std::exception& e) {
    throw CheckFail(what + ": untyped exception: " + std::string(e.what()));
  }
  throw CheckFail(what + ": no error raised");
}

// ---------------------------------------------------------------------------
// C1: the bundled six-node reference deployment assigns each of the four
// check cases to its expected level, 100 iterations per case, within the
// two-minute in-process budget.

std::string c1_reference_assignment() {
  auto t0 = Clock::now();
  Testbed bed(fig2(), RunMode::INPROC);
  const char* ids[] = {"T1", "T2", "T3", "T4"};
  std::size_t runs = 0;
  for (int i = 0; i < 100; ++i) {
    // run_case throws AssignmentMismatch on any level deviation and
    // KeyMismatch if the two sides ever disagree.
    for (const char* id : ids) {
      bed.run_case(id);
      ++runs;
    }
  }
  double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  expect(runs == 400, "expected 400 sessions");
  expect(ms < 120000.0, "exceeded the 2 minute budget: " + fmt_ms(ms) + " ms");
  return "400/400 correct assignments in " + fmt_ms(ms) + " ms";
}

// ---------------------------------------------------------------------------
// C2: initiator and target always hold byte-identical keys of the requested
// length: 100 sessions per level on the reference deployment plus 50
// randomized topologies (up to 8 nodes, random QN/CN split, random links).

std::string c2_key_agreement() {
  std::size_t sessions = 0;
  {
    Testbed bed(fig2(), RunMode::INPROC);
    struct Row {
      const char* node;
      const char* a;
      const char* b;
    };
    const Row rows[] = {{"E", "APP_E", "APP_F"},
                        {"D", "APP_D", "APP_F"},
                        {"C", "APP_C", "APP_D"},
                        {"A", "APP_A", "APP_B"}};
    for (const Row& r : rows) {
      for (int i = 0; i < 100; ++i) {
        AppKeyResult a = bed.app_client(r.node).app_get_key(r.a, r.b, 256);
        AppKeyResult b =
            bed.app_client(bed.node_of_app(r.b)).app_get_key_with_id(r.b, a.key_id);
        expect(a.key == b.key, std::string(r.a) + "->" + r.b + ": key mismatch");
        expect(a.key.size() == 32 && b.key.size() == 32,
               std::string(r.a) + "->" + r.b + ": wrong key length");
        ++sessions;
      }
    }
  }

  std::mt19937_64 gen(20260814u);
  for (int t = 0; t < 50; ++t) {
    TopologyConfig cfg;
    cfg.name = "rand" + std::to_string(t);
    std::size_t n = 2 + gen() % 7;  // 2..8 nodes
    std::vector<bool> qn(n);
    std::size_t qn_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      qn[i] = (gen() & 1u) != 0;
      qn_count += qn[i] ? 1 : 0;
      NodeDescriptor d;
      d.node_id = "N" + std::to_string(i);
      d.kind = qn[i] ? NodeKind::QN : NodeKind::CN;
      d.hosted_apps = {"APP_N" + std::to_string(i)};
      cfg.nodes.push_back(d);
    }
    std::uint64_t seed = 30000u + 100u * static_cast<std::uint64_t>(t);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!qn[i] || !qn[j] || (gen() & 1u)) continue;
        QkdLinkInfo l;
        l.endpoint_a = cfg.nodes[i].node_id;
        l.endpoint_b = cfg.nodes[j].node_id;
        l.seed = ++seed;
        cfg.links.push_back(l);
      }
    }
    Testbed bed(cfg, RunMode::INPROC);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), gen);
    std::size_t take = std::min<std::size_t>(6, pairs.size());
    for (std::size_t p = 0; p < take; ++p) {
      const std::string src = "APP_N" + std::to_string(pairs[p].first);
      const std::string dst = "APP_N" + std::to_string(pairs[p].second);
      AppKeyResult a = bed.app_client(cfg.nodes[pairs[p].first].node_id)
                           .app_get_key(src, dst, 256);
      AppKeyResult b =
          bed.app_client(cfg.nodes[pairs[p].second].node_id)
              .app_get_key_with_id(dst, a.key_id);
      expect(a.key == b.key, cfg.name + " " + src + "->" + dst + ": key mismatch");
      expect(a.key.size() == 32, cfg.name + ": wrong key length");
      ++sessions;
    }
  }
  return std::to_string(sessions) + " sessions, 0 mismatches";
}

// ---------------------------------------------------------------------------
// C3: the assigned level always equals the brute-force highest feasible
// level, exhaustively over a fixed link-pattern family on 2..6 nodes with
// every QN/CN assignment.

SecurityLevel brute_force_level(std::size_t n, const std::vector<bool>& qn,
                                const std::set<std::pair<std::size_t, std::size_t>>& edges,
                                std::size_t i, std::size_t j) {
  auto linked = [&](std::size_t a, std::size_t b) {
    return edges.count({std::min(a, b), std::max(a, b)}) != 0;
  };
  if (qn[i] && qn[j]) {
    if (linked(i, j)) return SecurityLevel::L1;
    // Breadth-first search over QKD links.
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> queue{i};
    seen[i] = true;
    while (!queue.empty()) {
      std::size_t cur = queue.back();
      queue.pop_back();
      if (cur == j) return SecurityLevel::L2;
      for (std::size_t k = 0; k < n; ++k) {
        if (!seen[k] && linked(cur, k)) {
          seen[k] = true;
          queue.push_back(k);
        }
      }
    }
    return SecurityLevel::L4;
  }
  if (qn[i] != qn[j]) {
    std::size_t q = qn[i] ? i : j;
    for (std::size_t k = 0; k < n; ++k)
      if (k != q && linked(q, k)) return SecurityLevel::L3;
  }
  return SecurityLevel::L4;
}

std::string c3_assignment_oracle() {
  std::size_t topologies = 0, checks = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    using Edges = std::set<std::pair<std::size_t, std::size_t>>;
    std::vector<Edges> patterns;
    patterns.push_back({});  // no links
    Edges path, star, complete;
    for (std::size_t i = 0; i + 1 < n; ++i) path.insert({i, i + 1});
    for (std::size_t i = 1; i < n; ++i) star.insert({0, i});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) complete.insert({i, j});
    patterns.push_back(path);
    patterns.push_back(star);
    if (n >= 3) {
      Edges ring = path;
      ring.insert({0, n - 1});
      patterns.push_back(ring);
    }
    patterns.push_back(complete);

    for (const Edges& pattern : patterns) {
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<bool> qn(n);
        for (std::size_t i = 0; i < n; ++i) qn[i] = (mask >> i) & 1u;
        Edges kept;
        for (const auto& e : pattern)
          if (qn[e.first] && qn[e.second]) kept.insert(e);

        auto hub = std::make_shared<InprocHub>();
        Qusec q(hub->factory());
        for (std::size_t i = 0; i < n; ++i) {
          NodeDescriptor d;
          d.node_id = "N" + std::to_string(i);
          d.kind = qn[i] ? NodeKind::QN : NodeKind::CN;
          if (qn[i]) d.kms_ids = {"KMS_N" + std::to_string(i)};
          d.hosted_apps = {"APP_N" + std::to_string(i)};
          q.register_node(d);
        }
        std::uint64_t seed = 5000;
        for (const auto& e : kept) {
          QkdLinkInfo l;
          l.endpoint_a = "N" + std::to_string(e.first);
          l.endpoint_b = "N" + std::to_string(e.second);
          l.link_id = make_link_id(l.endpoint_a, l.endpoint_b);
          l.seed = ++seed;
          q.register_link(l);
        }
        ++topologies;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            SecurityLevel got = q.assign_security_level(
                "APP_N" + std::to_string(i), "APP_N" + std::to_string(j));
            SecurityLevel want = brute_force_level(n, qn, kept, i, j);
            ++checks;
            expect(got == want,
                   "n=" + std::to_string(n) + " mask=" + std::to_string(mask) +
                       " pair N" + std::to_string(i) + "->N" + std::to_string(j) +
                       ": assigned " + level_name(got) + ", oracle says " +
                       level_name(want));
          }
        }
      }
    }
  }
  return std::to_string(topologies) + " topologies, " + std::to_string(checks) +
         " pairs, 0 deviations";
}

// ---------------------------------------------------------------------------
// C4: over line topologies of 2..6 quantum nodes, the key delivered at the
// terminal equals an independently recomputed hop-by-hop one-time-pad chain,
// and every hop consumes exactly one link key per store side. The pseudo-QKD
// stream is recomputed here from its documented construction, not through
// the fabric.

Bytes stream_input(const char* tag, const std::string& link_id, std::uint64_t seed,
                   std::uint64_t counter) {
  Bytes in = to_bytes(std::string(tag));
  Bytes lid = to_bytes(link_id);
  in.insert(in.end(), lid.begin(), lid.end());
  in.push_back(0x00);
  put_be64(in, seed);
  put_be64(in, counter);
  return in;
}

Bytes stream_key32(const std::string& link_id, std::uint64_t seed,
                   std::uint64_t counter) {
  return shake256(stream_input("qsnet-qkd-key", link_id, seed, counter), 32);
}

std::string stream_key_id(const std::string& link_id, std::uint64_t seed,
                          std::uint64_t counter) {
  Bytes h = sha3_256(stream_input("qsnet-qkd-id", link_id, seed, counter));
  h.resize(16);
  return uuid_from_bytes(h);
}

std::string c4_relay_oracle() {
  std::size_t chains = 0;
  for (std::size_t k = 2; k <= 6; ++k) {
    TopologyConfig cfg;
    cfg.name = "line" + std::to_string(k);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < k; ++i) {
      NodeDescriptor d;
      d.node_id = "Q" + std::to_string(i);
      d.kind = NodeKind::QN;
      d.hosted_apps = {"APP_Q" + std::to_string(i)};
      cfg.nodes.push_back(d);
    }
    for (std::size_t i = 0; i + 1 < k; ++i) {
      QkdLinkInfo l;
      l.endpoint_a = "Q" + std::to_string(i);
      l.endpoint_b = "Q" + std::to_string(i + 1);
      l.seed = 7000 + 100 * k + i;
      seeds.push_back(l.seed);
      cfg.links.push_back(l);
    }
    Testbed bed(cfg, RunMode::INPROC);

    auto log = std::make_shared<std::vector<RelayEnvelope>>();
    bed.hub()->set_forward_tamper(
        [log](const std::string&, RelayEnvelope& env) { log->push_back(env); });

    std::vector<std::size_t> before;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      before.push_back(bed.kms("KMS_Q" + std::to_string(i))
                           .status("Q" + std::to_string(i + 1))
                           .stored_key_count);
      before.push_back(bed.kms("KMS_Q" + std::to_string(i + 1))
                           .status("Q" + std::to_string(i))
                           .stored_key_count);
    }

    const std::string src = "APP_Q0";
    const std::string dst = "APP_Q" + std::to_string(k - 1);
    AppKeyResult a = bed.app_client("Q0").app_get_key(src, dst, 256);
    AppKeyResult b =
        bed.app_client("Q" + std::to_string(k - 1)).app_get_key_with_id(dst, a.key_id);
    expect(a.key == b.key, cfg.name + ": endpoint keys differ");

    if (k == 2) {
      expect(a.level == SecurityLevel::L1, cfg.name + ": expected L1");
      std::string lid = make_link_id("Q0", "Q1");
      expect(a.key.bytes() == stream_key32(lid, seeds[0], 0),
             cfg.name + ": direct key is not the recomputed link key");
      expect(log->empty(), cfg.name + ": unexpected relay traffic");
    } else {
      expect(a.level == SecurityLevel::L2, cfg.name + ": expected L2");
      expect(log->size() == k,
             cfg.name + ": expected " + std::to_string(k) + " envelopes, saw " +
                 std::to_string(log->size()));
      expect((*log)[0].pad_key_id.empty(), cfg.name + ": first hop should inject");
      const Bytes& injected = (*log)[0].payload;
      for (std::size_t h = 1; h < k; ++h) {
        const RelayEnvelope& env = (*log)[h];
        std::string lid =
            make_link_id("Q" + std::to_string(h - 1), "Q" + std::to_string(h));
        std::optional<std::uint64_t> ctr;
        for (std::uint64_t c = 0; c < 64; ++c) {
          if (stream_key_id(lid, seeds[h - 1], c) == env.pad_key_id) {
            ctr = c;
            break;
          }
        }
        expect(ctr.has_value(),
               cfg.name + " hop " + std::to_string(h) + ": pad id not in stream");
        Bytes pad = stream_key32(lid, seeds[h - 1], *ctr);
        Bytes recovered = xor_bytes(env.payload, pad);
        expect(recovered == injected,
               cfg.name + " hop " + std::to_string(h) + ": chain breaks");
      }
      expect(injected == a.key.bytes(),
             cfg.name + ": delivered key is not the recomputed chain value");
    }

    std::size_t slot = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      for (const auto& [kms, peer] :
           {std::pair<std::string, std::string>{"KMS_Q" + std::to_string(i),
                                                "Q" + std::to_string(i + 1)},
            std::pair<std::string, std::string>{"KMS_Q" + std::to_string(i + 1),
                                                "Q" + std::to_string(i)}}) {
        std::size_t now = bed.kms(kms).status(peer).stored_key_count;
        expect(before[slot] - now == 1,
               cfg.name + ": " + kms + " side of hop " + std::to_string(i) +
                   " consumed " + std::to_string(before[slot] - now) + " keys");
        ++slot;
      }
    }
    bed.hub()->set_forward_tamper(nullptr);
    ++chains;
  }
  return std::to_string(chains) + " line topologies, 0 deviations";
}

// ---------------------------------------------------------------------------
// C5: link keys are strictly one-time-use. Random interleavings of fresh
// fetches and fetch-by-id on both store sides never yield the same bytes
// twice from one side, and a second fetch of a consumed id always errors.

std::string c5_one_time_use() {
  TopologyConfig cfg;
  cfg.name = "pair";
  for (const char* id : {"X", "Y"}) {
    NodeDescriptor d;
    d.node_id = id;
    d.kind = NodeKind::QN;
    d.hosted_apps = {std::string("APP_") + id};
    cfg.nodes.push_back(d);
  }
  QkdLinkInfo l;
  l.endpoint_a = "X";
  l.endpoint_b = "Y";
  l.seed = 4242;
  cfg.links.push_back(l);
  Testbed bed(cfg, RunMode::INPROC);
  KmsService& kx = bed.kms("KMS_X");
  KmsService& ky = bed.kms("KMS_Y");

  std::mt19937_64 gen(0x0ddba11u);
  // Per store side: id -> hex of served bytes, plus the set of all byte
  // strings ever served by that side.
  std::map<std::string, std::string> seen[2];
  std::set<std::string> served[2];
  std::size_t fresh = 0, by_id = 0, rejected = 0;

  auto note = [&](int side, const KeyWithId& kw) {
    std::string hex = to_hex(kw.key.view());
    expect(served[side].insert(hex).second,
           "store side served the same key bytes twice");
    expect(seen[side].emplace(kw.key_id, hex).second,
           "store side served the same key id twice");
    auto other = seen[1 - side].find(kw.key_id);
    if (other != seen[1 - side].end())
      expect(other->second == hex, "the two sides disagree on a key id");
  };
  auto pending_for = [&](int side) {
    // Ids consumed on the other side but not yet on `side`.
    std::vector<std::string> out;
    for (const auto& [id, hex] : seen[1 - side])
      if (!seen[side].count(id)) out.push_back(id);
    return out;
  };

  for (int step = 0; step < 600; ++step) {
    int side = static_cast<int>(gen() & 1u);
    KmsService& mine = side == 0 ? kx : ky;
    const char* peer = side == 0 ? "Y" : "X";
    switch (gen() % 3) {
      case 0: {
        note(side, mine.get_key("app", peer, 1, 256)[0]);
        ++fresh;
        break;
      }
      case 1: {
        std::vector<std::string> ids = pending_for(side);
        if (ids.empty()) break;
        std::string id = ids[gen() % ids.size()];
        note(side, mine.get_key_with_id("app", {id})[0]);
        ++by_id;
        break;
      }
      case 2: {
        if (seen[side].empty()) break;
        auto it = seen[side].begin();
        std::advance(it, static_cast<long>(gen() % seen[side].size()));
        std::string id = it->first;
        expect_error([&] { mine.get_key_with_id("app", {id}); },
                     {Errc::AlreadyConsumed}, "re-fetch of a consumed id");
        ++rejected;
        break;
      }
    }
  }
  expect(fresh > 100 && by_id > 50 && rejected > 50,
         "interleaving did not exercise all operation kinds");
  return std::to_string(fresh) + " fresh, " + std::to_string(by_id) +
         " by-id, " + std::to_string(rejected) + " duplicate fetches rejected";
}

// ---------------------------------------------------------------------------
// C6: the hybrid derivation is sensitive to every single bit of every input
// secret at L3 and dual-KEM L4, and matches a fixed vector recomputed here
// with an independent extract-then-expand implementation.

Bytes independent_kdf(const std::vector<SecretInput>& inputs,
                      const DerivationContext& ctx) {
  Bytes ikm;
  for (const SecretInput& in : inputs) {
    put_lv(ikm, in.label);
    put_lv(ikm, in.material.view());
  }
  Bytes prk = hmac_sha256(to_bytes(std::string("qsnet-hybrid-kdf-v1")), ikm);
  Bytes info = to_bytes(std::string("qsnet-session-key"));
  info.push_back(0x00);
  put_lv(info, ctx.session_id);
  put_lv(info, ctx.initiator_app);
  put_lv(info, ctx.target_app);
  info.push_back(static_cast<std::uint8_t>(level_number(ctx.level)));
  put_be32(info, static_cast<std::uint32_t>(ctx.out_len_bits));

  std::size_t len = ctx.out_len_bits / 8;
  Bytes out, t;
  std::uint8_t i = 1;
  while (out.size() < len) {
    Bytes block = t;
    block.insert(block.end(), info.begin(), info.end());
    block.push_back(i++);
    t = hmac_sha256(prk, block);
    out.insert(out.end(), t.begin(), t.end());
  }
  out.resize(len);
  return out;
}

std::string c6_hybrid_sensitivity() {
  // Fixed vector against the independent oracle.
  std::ifstream in(std::string(QSNET_TEST_DATA_DIR) + "/derived_vectors.json");
  expect(static_cast<bool>(in), "cannot open derived_vectors.json");
  json vectors;
  in >> vectors;
  const json& fixed = vectors.at("kdf_fixed");
  std::vector<SecretInput> fixed_inputs;
  for (const json& e : fixed.at("inputs")) {
    fixed_inputs.push_back({e.at("label").get<std::string>(),
                            KeyMaterial(from_hex(e.at("material").get<std::string>()))});
  }
  DerivationContext fixed_ctx{fixed.at("session_id").get<std::string>(),
                              fixed.at("initiator_app").get<std::string>(),
                              fixed.at("target_app").get<std::string>(),
                              static_cast<SecurityLevel>(fixed.at("level").get<int>()),
                              fixed.at("out_len_bits").get<std::size_t>()};
  Bytes want = from_hex(fixed.at("expected").get<std::string>());
  expect(kdf_combine(fixed_inputs, fixed_ctx).bytes() == want,
         "kdf output differs from the frozen vector");
  expect(independent_kdf(fixed_inputs, fixed_ctx) == want,
         "independent extract-then-expand oracle disagrees with the vector");

  // Bit-flip avalanche over every input secret.
  auto avalanche = [](const std::vector<std::string>& labels, SecurityLevel lvl) {
    std::mt19937_64 gen(0xfeedu + static_cast<unsigned>(level_number(lvl)));
    std::vector<Bytes> secrets(labels.size());
    for (Bytes& s : secrets) {
      s.resize(32);
      for (auto& byte : s) byte = static_cast<std::uint8_t>(gen());
    }
    DerivationContext ctx{"acc-sess", "APP_I", "APP_T", lvl, 256};
    auto derive = [&](const std::vector<Bytes>& mats) {
      std::vector<SecretInput> ins;
      for (std::size_t i = 0; i < labels.size(); ++i)
        ins.push_back({labels[i], KeyMaterial(mats[i])});
      return kdf_combine(ins, ctx).bytes();
    };
    Bytes base = derive(secrets);
    std::size_t total = 0, changed = 0;
    for (std::size_t si = 0; si < secrets.size(); ++si) {
      for (std::size_t bit = 0; bit < 256; ++bit) {
        std::vector<Bytes> mod = secrets;
        mod[si][bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        ++total;
        if (derive(mod) != base) ++changed;
      }
    }
    return std::pair<std::size_t, std::size_t>{changed, total};
  };
  auto [l3_changed, l3_total] = avalanche({"kem1", "qkd"}, SecurityLevel::L3);
  auto [l4_changed, l4_total] = avalanche({"kem1", "kem2"}, SecurityLevel::L4);
  expect(l3_total >= 256 && l3_changed == l3_total,
         "L3 flip left the key unchanged (" + std::to_string(l3_changed) + "/" +
             std::to_string(l3_total) + ")");
  expect(l4_total >= 256 && l4_changed == l4_total,
         "dual-KEM L4 flip left the key unchanged (" + std::to_string(l4_changed) +
             "/" + std::to_string(l4_total) + ")");
  return std::to_string(l3_changed + l4_changed) + "/" +
         std::to_string(l3_total + l4_total) +
         " flips changed the key; fixed vector matches the oracle";
}

// ---------------------------------------------------------------------------
// C7: target-side retrieval never triggers assignment or configuration; it
// costs exactly one session lookup at the controller, at every level.

std::string c7_bypass() {
  Testbed bed(fig2(), RunMode::INPROC);
  struct Row {
    const char* node;
    const char* a;
    const char* b;
  };
  const Row rows[] = {{"E", "APP_E", "APP_F"},
                      {"D", "APP_D", "APP_F"},
                      {"C", "APP_C", "APP_D"},
                      {"A", "APP_A", "APP_B"}};
  for (const Row& r : rows) {
    AppKeyResult a = bed.app_client(r.node).app_get_key(r.a, r.b, 256);
    QusecStats s0 = bed.qusec().stats();
    bed.app_client(bed.node_of_app(r.b)).app_get_key_with_id(r.b, a.key_id);
    QusecStats s1 = bed.qusec().stats();
    std::string who = std::string(r.a) + "->" + r.b;
    expect(s1.config_requests == s0.config_requests,
           who + ": pickup issued a configuration request");
    expect(s1.level_requests == s0.level_requests,
           who + ": pickup issued an assignment request");
    expect(s1.derived_reports == s0.derived_reports,
           who + ": pickup reported a derivation");
    expect(s1.session_lookups == s0.session_lookups + 1,
           who + ": pickup cost " +
               std::to_string(s1.session_lookups - s0.session_lookups) +
               " lookups, expected 1");
  }
  return "0 configuration requests, 1 lookup per pickup at all levels";
}

// ---------------------------------------------------------------------------
// C8: per-phase latency statistics are produced for all four levels in both
// transports; every end-to-end time dominates each of its component phases,
// the component sum never exceeds end-to-end plus scheduling slack, and
// every networked session completes in under a second.

std::string c8_latency() {
  double worst_net = 0.0;
  std::size_t profiled = 0;
  for (RunMode mode : {RunMode::INPROC, RunMode::NET}) {
    Testbed bed(fig2(), mode);
    LatencyReport rep;
    for (const char* id : {"T1", "T2", "T3", "T4"})
      for (int i = 0; i < 5; ++i) rep.add(bed.run_case(id));
    json summary = rep.summary();
    for (const char* id : {"T1", "T2", "T3", "T4"}) {
      expect(summary.contains(id), std::string("no statistics for ") + id);
      expect(summary.at(id).contains("initiator") && summary.at(id).contains("target"),
             std::string(id) + ": missing a side in the summary");
    }
    for (const CaseResult& r : rep.samples()) {
      for (const PhaseTimings& t : {r.initiator, r.target}) {
        const double e2e = t.t_e2e_ms;
        for (double phase : {t.t_assignment_ms, t.t_configuration_ms,
                             t.t_derivation_ms, t.t_delivery_ms}) {
          expect(e2e + 1e-6 >= phase,
                 r.case_id + ": a phase exceeds its end-to-end time");
        }
        double sum = t.t_assignment_ms + t.t_configuration_ms + t.t_derivation_ms +
                     t.t_delivery_ms;
        expect(sum <= e2e + 5.0,
               r.case_id + ": phase sum " + fmt_ms(sum) + " ms exceeds e2e " +
                   fmt_ms(e2e) + " ms + 5 ms");
        if (mode == RunMode::NET) {
          expect(e2e < 1000.0,
                 r.case_id + ": networked e2e " + fmt_ms(e2e) + " ms >= 1 s");
          worst_net = std::max(worst_net, e2e);
        }
      }
      ++profiled;
    }
  }
  return std::to_string(profiled) + " sessions profiled; worst networked e2e " +
         fmt_ms(worst_net) + " ms";
}

// ---------------------------------------------------------------------------
// C9: fifty fault-injection scenarios (dead services, dead links, exhausted
// stores, tampered session traffic). Every one must surface a typed error to
// the caller, and no scenario may deliver a key to any application or leave
// the controller believing a key was derived.

void flip_first_char(json& field) {
  std::string s = field.get<std::string>();
  if (s.empty())
    s = "00";
  else
    s[0] = s[0] == '0' ? '1' : '0';
  field = s;
}

struct Scenario {
  std::string name;
  std::string init_node;
  std::string initiator_app;
  std::string target_app;
  std::function<void(Testbed&, std::shared_ptr<std::string>)> setup;
  std::vector<Errc> codes;
  std::vector<Errc> causes;  // empty: cause not checked
  bool dual_kem = false;
  bool check_purged = true;  // off when a vKMS is downed mid-session
};

void run_fail_scenario(const Scenario& sc) {
  TopologyConfig cfg = fig2();
  if (sc.dual_kem) cfg.defaults.dual_kem = true;
  Testbed bed(cfg, RunMode::INPROC);
  auto sid = std::make_shared<std::string>();
  if (sc.setup) sc.setup(bed, sid);

  QusecStats s0 = bed.qusec().stats();
  Caught got = expect_error(
      [&] {
        bed.app_client(sc.init_node).app_get_key(sc.initiator_app, sc.target_app, 256);
      },
      sc.codes, sc.name);
  if (!sc.causes.empty()) {
    expect(got.cause.has_value(), sc.name + ": error carried no cause");
    bool cause_ok = false;
    for (Errc c : sc.causes) cause_ok = cause_ok || *got.cause == c;
    expect(cause_ok, sc.name + ": unexpected cause " + errc_name(*got.cause));
  }

  QusecStats s1 = bed.qusec().stats();
  expect(s1.derived_reports == s0.derived_reports,
         sc.name + ": a derivation completed despite the fault");
  expect(s1.session_lookups == s0.session_lookups,
         sc.name + ": a key was picked up despite the fault");
  if (!sid->empty()) {
    // The key id is minted at configuration; only the state records whether a
    // derivation was ever acknowledged.
    SessionRecord rec = bed.qusec().session(*sid);
    expect(rec.state == SessionState::CONFIGURED,
           sc.name + ": session advanced past CONFIGURED");
    if (sc.check_purged) {
      for (const char* node : {"A", "B", "C", "D", "E", "F"})
        expect(!bed.vkms(node).has_pending(*sid),
               sc.name + ": pending key state left on node " + std::string(node));
    }
  }
}

std::string c9_fail_closed() {
  using Sid = std::shared_ptr<std::string>;
  using Setup = std::function<void(Testbed&, Sid)>;

  auto svc_down = [](std::string svc) {
    return Setup([svc](Testbed& b, Sid) { b.hub()->set_down(svc, true); });
  };
  auto link_cut = [](std::string kms, std::string a, std::string b2) {
    return Setup([kms, a, b2](Testbed& b, Sid) {
      b.kms(kms).set_link_up(make_link_id(a, b2), false);
    });
  };
  auto drained = [](std::string kms, std::string peer) {
    return Setup([kms, peer](Testbed& b, Sid) {
      KmsService& k = b.kms(kms);
      k.set_refill([](const std::string&) { return false; });
      while (k.status(peer).stored_key_count > 0) k.get_key("drain", peer, 1, 256);
    });
  };
  auto field_flip = [](std::string type, std::string field) {
    return Setup([type, field](Testbed& b, Sid sid) {
      b.hub()->set_message_tamper([type, field, sid](const std::string&,
                                                     const std::string& s,
                                                     std::string& t, json& body) {
        if (t == type && body.contains(field)) {
          *sid = s;
          flip_first_char(body.at(field));
        }
      });
    });
  };
  auto forward_flip_once = []() {
    return Setup([](Testbed& b, Sid) {
      auto fired = std::make_shared<bool>(false);
      // Flipping every padded hop would cancel out under the XOR chain, so
      // corrupt exactly one.
      b.hub()->set_forward_tamper([fired](const std::string&, RelayEnvelope& env) {
        if (env.pad_key_id.empty() || *fired) return;
        *fired = true;
        env.payload[0] ^= 0x01;
      });
    });
  };
  auto type_rewrite = [](std::string from, std::string to) {
    return Setup([from, to](Testbed& b, Sid sid) {
      b.hub()->set_message_tamper([from, to, sid](const std::string&,
                                                  const std::string& s, std::string& t,
                                                  json&) {
        if (t == from) {
          *sid = s;
          t = to;
        }
      });
    });
  };
  auto down_on = [](std::string type, std::string svc) {
    return Setup([type, svc](Testbed& b, Sid sid) {
      InprocHub* hub = b.hub();
      hub->set_message_tamper([type, svc, sid, hub](const std::string&,
                                                    const std::string& s,
                                                    std::string& t, json&) {
        if (t == type) {
          *sid = s;
          hub->set_down(svc, true);
        }
      });
    });
  };

  const std::vector<Errc> pu = {Errc::ParticipantUnreachable};
  const std::vector<Errc> cu = {Errc::ControllerUnreachable};
  const std::vector<Errc> df = {Errc::DerivationFailed};
  const std::vector<Errc> svc = {Errc::ServiceUnavailable};
  const std::vector<Errc> icf = {Errc::IntegrityCheckFailed};
  const std::vector<Errc> icf_or_pk = {Errc::IntegrityCheckFailed,
                                       Errc::MalformedPublicKey};

  std::vector<Scenario> scns;
  auto add = [&](std::string name, std::string node, std::string a, std::string b,
                 Setup setup, std::vector<Errc> codes, std::vector<Errc> causes,
                 bool dual = false, bool purged = true) {
    scns.push_back({std::move(name), std::move(node), std::move(a), std::move(b),
                    std::move(setup), std::move(codes), std::move(causes), dual,
                    purged});
  };

  // Dead vKMS participants: configuration fails closed before any secret moves.
  add("dead target vkms (L1)", "E", "APP_E", "APP_F", svc_down("vkms_F"), pu, svc);
  add("dead target vkms (L2)", "D", "APP_D", "APP_F", svc_down("vkms_F"), pu, svc);
  add("dead passive vkms (L3)", "C", "APP_C", "APP_D", svc_down("vkms_D"), pu, svc);
  add("dead target vkms (L4)", "A", "APP_A", "APP_B", svc_down("vkms_B"), pu, svc);
  add("dead relay vkms (L3)", "C", "APP_C", "APP_D", svc_down("vkms_E"), pu, svc);
  add("dead initiator-peer vkms (L1)", "E", "APP_E", "APP_F", svc_down("vkms_E"), pu,
      svc);
  add("dead initiator vkms (L2)", "D", "APP_D", "APP_F", svc_down("vkms_D"), pu, svc);
  add("dead initiator vkms (L4)", "A", "APP_A", "APP_B", svc_down("vkms_A"), pu, svc);
  add("dead receiver vkms (L3)", "C", "APP_C", "APP_D", svc_down("vkms_C"), pu, svc);
  add("dead initiator vkms, reversed pair (L1)", "F", "APP_F", "APP_E",
      svc_down("vkms_F"), pu, svc);

  // Dead controller: assignment cannot even start.
  add("dead controller (L1)", "E", "APP_E", "APP_F", svc_down("qusec"), cu, {});
  add("dead controller (L2)", "D", "APP_D", "APP_F", svc_down("qusec"), cu, {});
  add("dead controller (L3)", "C", "APP_C", "APP_D", svc_down("qusec"), cu, {});
  add("dead controller (L4)", "A", "APP_A", "APP_B", svc_down("qusec"), cu, {});

  // Dead local KMS: the owning vKMS reports it during installation.
  add("dead target KMS (L1)", "E", "APP_E", "APP_F", svc_down("KMS_F"), pu,
      {Errc::LocalKmsUnavailable});
  add("dead initiator KMS (L1)", "E", "APP_E", "APP_F", svc_down("KMS_E"), pu,
      {Errc::LocalKmsUnavailable});
  add("dead entry KMS (L2)", "D", "APP_D", "APP_F", svc_down("KMS_D"), pu,
      {Errc::LocalKmsUnavailable});
  add("dead terminal KMS (L2)", "D", "APP_D", "APP_F", svc_down("KMS_F"), pu,
      {Errc::LocalKmsUnavailable});
  add("dead passive KMS (L3)", "C", "APP_C", "APP_D", svc_down("KMS_D"), pu,
      {Errc::LocalKmsUnavailable});
  add("dead relay KMS (L3)", "C", "APP_C", "APP_D", svc_down("KMS_E"), pu,
      {Errc::LocalKmsUnavailable});

  // Downed QKD links: derivation starts and must abort cleanly.
  add("link down at source (L1)", "E", "APP_E", "APP_F", link_cut("KMS_E", "E", "F"),
      df, svc);
  add("entry link down (L2)", "D", "APP_D", "APP_F", link_cut("KMS_D", "D", "E"), df,
      svc);
  add("mid-chain link down (L2)", "D", "APP_D", "APP_F", link_cut("KMS_E", "E", "F"),
      df, svc);
  add("relay link down (L3)", "C", "APP_C", "APP_D", link_cut("KMS_D", "D", "E"), df,
      svc);

  // Exhausted key stores with refill disabled.
  add("source store exhausted (L1)", "E", "APP_E", "APP_F", drained("KMS_E", "F"), df,
      {Errc::KeysExhausted});
  add("target store exhausted (L1)", "E", "APP_E", "APP_F", drained("KMS_F", "E"), df,
      {Errc::AlreadyConsumed});
  add("mid-chain pads exhausted (L2)", "D", "APP_D", "APP_F", drained("KMS_E", "F"),
      df, {Errc::LinkKeysExhausted});
  add("inbound pads exhausted (L2)", "D", "APP_D", "APP_F", drained("KMS_E", "D"), df,
      {Errc::AlreadyConsumed});

  // Tampered session traffic: integrity must fail closed.
  add("tampered key confirmation (L1)", "E", "APP_E", "APP_F",
      field_flip("l1_deliver", "tag"), df, icf);
  add("tampered key id (L1)", "E", "APP_E", "APP_F", field_flip("l1_deliver", "key_id"),
      df, {Errc::UnknownKeyId});
  add("tampered relay confirmation (L2)", "D", "APP_D", "APP_F",
      field_flip("l2_notify", "tag"), df, icf);
  add("tampered transport id (L2)", "D", "APP_D", "APP_F",
      field_flip("l2_notify", "key_id"), df, icf);
  add("corrupted relay ciphertext (L2)", "D", "APP_D", "APP_F", forward_flip_once(),
      df, icf);
  add("tampered KEM ciphertext (L3)", "D", "APP_D", "APP_C", field_flip("l3_run", "ct1"),
      df, icf);
  add("tampered wrapped QKD key (L3)", "D", "APP_D", "APP_C",
      field_flip("l3_run", "enc"), df, icf);
  add("tampered relay attestation (L3)", "D", "APP_D", "APP_C",
      field_flip("l3_run", "relay_tag"), df, icf);
  add("tampered auxiliary ciphertext (L3)", "D", "APP_D", "APP_C",
      field_flip("l3_run", "ct_aux"), df, icf);
  add("tampered confirmation tag (L3)", "D", "APP_D", "APP_C",
      field_flip("l3_run", "tag"), df, icf);
  add("tampered QKD key id toward relay (L3)", "C", "APP_C", "APP_D",
      field_flip("l3_relay", "qk_id"), df, {Errc::UnknownKeyId});
  add("tampered auxiliary public key (L3)", "C", "APP_C", "APP_D",
      field_flip("l3_start", "pk_aux"), df, icf_or_pk);
  add("tampered KEM public key (L3)", "C", "APP_C", "APP_D",
      field_flip("l3_start", "pk1"), df, icf_or_pk);
  add("tampered confirmation tag (L4)", "A", "APP_A", "APP_B",
      field_flip("confirm", "tag"), df, icf);
  add("tampered receiver confirmation (L3)", "C", "APP_C", "APP_D",
      field_flip("confirm", "tag"), df, icf);
  add("tampered KEM public key (L4)", "A", "APP_A", "APP_B",
      field_flip("l4_start", "pk1"), df, icf_or_pk);
  add("tampered second public key (dual-KEM L4)", "A", "APP_A", "APP_B",
      field_flip("l4_start", "pk2"), df, icf_or_pk, /*dual=*/true);
  add("rewritten message type (L4)", "A", "APP_A", "APP_B",
      type_rewrite("confirm", "bogus"), df, {Errc::InvalidRequest});

  // Mid-session crashes after secrets are in flight.
  add("peer dies before confirmation (L4)", "A", "APP_A", "APP_B",
      down_on("confirm", "vkms_B"), df, svc, /*dual=*/false, /*purged=*/false);
  add("peer dies before delivery (L1)", "E", "APP_E", "APP_F",
      down_on("l1_deliver", "vkms_F"), df, svc);

  // Reversed-direction tampers.
  add("tampered confirmation, reversed pair (L1)", "F", "APP_F", "APP_E",
      field_flip("l1_deliver", "tag"), df, icf);
  add("tampered confirmation, reversed pair (L4)", "B", "APP_B", "APP_A",
      field_flip("confirm", "tag"), df, icf);

  expect(scns.size() == 50,
         "expected 50 scenarios, have " + std::to_string(scns.size()));
  for (const Scenario& sc : scns) run_fail_scenario(sc);
  return "50/50 scenarios raised typed errors, 0 keys delivered";
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* id;
  const char* title;
  std::function<std::string()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"C1", "reference deployment assigns all four cases correctly",
       c1_reference_assignment},
      {"C2", "both endpoints always derive byte-identical keys", c2_key_agreement},
      {"C3", "assigned level matches the brute-force feasibility oracle",
       c3_assignment_oracle},
      {"C4", "relayed keys match the recomputed hop-by-hop pad chain",
       c4_relay_oracle},
      {"C5", "link keys are one-time use under random interleavings",
       c5_one_time_use},
      {"C6", "derived keys are sensitive to every input secret bit",
       c6_hybrid_sensitivity},
      {"C7", "target retrieval bypasses assignment and configuration", c7_bypass},
      {"C8", "per-phase latency decomposes consistently in both modes", c8_latency},
      {"C9", "injected faults fail closed with typed errors", c9_fail_closed},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    try {
      std::string detail = c.run();
      std::cout << "[PASS] " << c.id << " " << c.title << " (" << detail << ")\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "[FAIL] " << c.id << " " << c.title << ": " << e.what() << "\n";
    }
    std::cout.flush();
  }
  if (failures > 0) {
    std::cout << failures << " of 9 criteria failed\n";
    return 1;
  }
  std::cout << "all 9 criteria passed\n";
  return 0;
}
