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

#include "qsnet/http_api.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "qsnet/bytes.hpp"
#include "qsnet/errors.hpp"
#include "qsnet/kms.hpp"
#include "qsnet/qusec.hpp"
#include "qsnet/vkms.hpp"

namespace qsnet {
namespace {

using nlohmann::json;

int status_for(Errc c) {
  switch (c) {
    case Errc::ServiceUnavailable:
    case Errc::ControllerUnreachable:
    case Errc::LocalKmsUnavailable:
    case Errc::ParticipantUnreachable:
      return 503;
    case Errc::Internal:
      return 500;
    default:
      return 400;
  }
}

// what() carries "<code>: <message>"; send just the message so the client
// side does not stack the prefix when it rethrows.
std::string bare_message(const Error& e) {
  std::string w = e.what();
  std::string prefix = std::string(errc_name(e.code())) + ": ";
  return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

void write_json(httplib::Response& res, const json& j) {
  res.status = 200;
  res.set_content(j.dump(), "application/json");
}

void write_error(httplib::Response& res, const Error& e) {
  json j = {{"error", errc_name(e.code())}, {"message", bare_message(e)}};
  if (e.cause()) j["cause"] = errc_name(*e.cause());
  res.status = status_for(e.code());
  res.set_content(j.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

void handle(httplib::Response& res, const std::function<json()>& fn) {
  try {
    write_json(res, fn());
  } catch (const Error& e) {
    write_error(res, e);
  } catch (const json::exception& e) {
    write_error(res, Error(Errc::ParseError, e.what()));
  } catch (const std::exception& e) {
    write_error(res, Error(Errc::Internal, e.what()));
  }
}

json keys_to_json(const std::vector<KeyWithId>& keys) {
  json arr = json::array();
  for (const auto& k : keys)
    arr.push_back({{"key_ID", k.key_id}, {"key", to_base64(k.key.bytes())}});
  return json{{"keys", arr}};
}

std::vector<KeyWithId> keys_from_json(const json& j) {
  std::vector<KeyWithId> out;
  for (const auto& k : j.at("keys"))
    out.push_back({k.at("key_ID").get<std::string>(),
                   KeyMaterial(from_base64(k.at("key").get<std::string>()))});
  return out;
}

json app_result_to_json(const AppKeyResult& r) {
  json key = {{"key_ID", r.key_id}, {"key", to_base64(r.key.bytes())}};
  json out;
  out["keys"] = json::array({key});
  out["level"] = level_name(r.level);
  out["timings"] = r.timings;
  return out;
}

AppKeyResult app_result_from_json(const json& j) {
  AppKeyResult r;
  const json& k = j.at("keys").at(0);
  r.key_id = k.at("key_ID").get<std::string>();
  r.key = KeyMaterial(from_base64(k.at("key").get<std::string>()));
  r.level = level_from_name(j.at("level").get<std::string>());
  if (j.contains("timings")) r.timings = j.at("timings").get<PhaseTimings>();
  return r;
}

// One request/response against `endpoint`. Remote typed errors are
// reconstructed from the body; transport failures throw `transport_code`.
json roundtrip(const std::string& endpoint, bool get, const std::string& path,
               const json& body, Errc transport_code) {
  httplib::Client cli(endpoint);
  cli.set_connection_timeout(2, 0);
  cli.set_read_timeout(60, 0);
  httplib::Result r =
      get ? cli.Get(path) : cli.Post(path, body.dump(), "application/json");
  if (!r)
    throw Error(transport_code,
                endpoint + path + ": " + httplib::to_string(r.error()));
  json j;
  try {
    j = r->body.empty() ? json::object() : json::parse(r->body);
  } catch (const json::exception&) {
    j = json::object();
  }
  if (r->status != 200) {
    auto code = errc_from_name(j.value("error", ""));
    std::string msg =
        j.value("message", "http status " + std::to_string(r->status));
    if (!code) throw Error(transport_code, endpoint + path + ": " + msg);
    auto cause = errc_from_name(j.value("cause", ""));
    if (cause) throw Error(*code, msg, *cause);
    throw Error(*code, msg);
  }
  return j;
}

json post_json(const std::string& endpoint, const std::string& path,
               const json& body, Errc transport_code) {
  return roundtrip(endpoint, false, path, body, transport_code);
}

json get_json(const std::string& endpoint, const std::string& path,
              Errc transport_code) {
  return roundtrip(endpoint, true, path, json::object(), transport_code);
}

class HttpQusecClient : public QusecClient {
 public:
  explicit HttpQusecClient(std::string ep) : ep_(std::move(ep)) {}

  void register_node(const NodeDescriptor& node) override {
    post_json(ep_, "/register_node", node, Errc::ControllerUnreachable);
  }

  void register_link(const QkdLinkInfo& link) override {
    post_json(ep_, "/register_link", link, Errc::ControllerUnreachable);
  }

  SecurityLevel security_level_request(const std::string& src_app,
                                       const std::string& dst_app) override {
    json j = post_json(ep_, "/security_level_request",
                       {{"src_app", src_app}, {"dst_app", dst_app}},
                       Errc::ControllerUnreachable);
    return level_from_name(j.at("level").get<std::string>());
  }

  SessionPolicy configuration_request(const std::string& src_app,
                                      const std::string& dst_app,
                                      SecurityLevel level,
                                      std::size_t out_len_bits) override {
    json j = post_json(ep_, "/configuration_request",
                       {{"src_app", src_app},
                        {"dst_app", dst_app},
                        {"level", level_name(level)},
                        {"out_len_bits", out_len_bits}},
                       Errc::ControllerUnreachable);
    return j.get<SessionPolicy>();
  }

  SessionLookup session_lookup(const std::string& target_app,
                               const std::string& key_id) override {
    json j = post_json(ep_, "/session_lookup",
                       {{"target_app", target_app}, {"key_id", key_id}},
                       Errc::ControllerUnreachable);
    SessionLookup out;
    out.session_id = j.at("session_id").get<std::string>();
    out.level = level_from_name(j.at("level").get<std::string>());
    out.initiator_app = j.at("initiator_app").get<std::string>();
    out.target_app = j.at("target_app").get<std::string>();
    out.state = j.at("state").get<std::string>();
    return out;
  }

  void report_derived(const std::string& session_id,
                      const std::string& key_id) override {
    post_json(ep_, "/report_derived",
              {{"session_id", session_id}, {"key_id", key_id}},
              Errc::ControllerUnreachable);
  }

  QusecStats stats() override {
    json j = get_json(ep_, "/stats", Errc::ControllerUnreachable);
    QusecStats s;
    s.level_requests = j.value("level_requests", std::uint64_t{0});
    s.config_requests = j.value("config_requests", std::uint64_t{0});
    s.session_lookups = j.value("session_lookups", std::uint64_t{0});
    s.derived_reports = j.value("derived_reports", std::uint64_t{0});
    return s;
  }

 private:
  std::string ep_;
};

class HttpKmsClient : public KmsClient {
 public:
  explicit HttpKmsClient(std::string ep) : ep_(std::move(ep)) {}

  std::vector<KeyWithId> get_key(const std::string& caller_app,
                                 const std::string& peer, std::size_t number,
                                 std::size_t size_bits) override {
    json j = post_json(ep_, "/api/v1/keys/" + peer + "/enc_keys",
                       {{"caller", caller_app},
                        {"number", number},
                        {"size", size_bits}},
                       Errc::ServiceUnavailable);
    return keys_from_json(j);
  }

  std::vector<KeyWithId> get_key_with_id(
      const std::string& caller_app,
      const std::vector<std::string>& key_ids) override {
    json ids = json::array();
    for (const auto& id : key_ids) ids.push_back({{"key_ID", id}});
    json j = post_json(ep_, "/api/v1/keys/" + caller_app + "/dec_keys",
                       {{"key_IDs", ids}}, Errc::ServiceUnavailable);
    return keys_from_json(j);
  }

  KmsStatus status(const std::string& peer) override {
    json j = get_json(ep_, "/api/v1/keys/" + peer + "/status",
                      Errc::ServiceUnavailable);
    KmsStatus s;
    s.stored_key_count = j.value("stored_key_count", std::size_t{0});
    s.key_size_bits = j.value("key_size", std::size_t{0});
    s.link_up = j.value("link_up", false);
    return s;
  }

  void install_relay_rule(const RelayRule& rule) override {
    post_json(ep_, "/relay/rules", rule, Errc::ServiceUnavailable);
  }

  void remove_relay_rule(const std::string& session_id) override {
    post_json(ep_, "/relay/rules/remove", {{"session_id", session_id}},
              Errc::ServiceUnavailable);
  }

  void forward_relayed_key(const RelayEnvelope& env) override {
    post_json(ep_, "/relay/forward",
              {{"session_id", env.session_id},
               {"key_id", env.key_id},
               {"payload", to_base64(env.payload)},
               {"pad_key_id", env.pad_key_id}},
              Errc::ServiceUnavailable);
  }

  KeyWithId fetch_relayed(const std::string& session_id) override {
    json j = post_json(ep_, "/relay/fetch", {{"session_id", session_id}},
                       Errc::ServiceUnavailable);
    return {j.at("key_ID").get<std::string>(),
            KeyMaterial(from_base64(j.at("key").get<std::string>()))};
  }

  void ping() override { get_json(ep_, "/health", Errc::ServiceUnavailable); }

 private:
  std::string ep_;
};

class HttpVkmsClient : public VkmsClient {
 public:
  explicit HttpVkmsClient(std::string ep) : ep_(std::move(ep)) {}

  void install_policy(const SessionPolicy& policy) override {
    post_json(ep_, "/policy/install", policy, Errc::ServiceUnavailable);
  }

  void remove_policy(const std::string& session_id) override {
    post_json(ep_, "/policy/remove", {{"session_id", session_id}},
              Errc::ServiceUnavailable);
  }

  json session_message(const std::string& session_id, const std::string& type,
                       const json& body) override {
    return post_json(
        ep_, "/session_message",
        {{"session_id", session_id}, {"type", type}, {"body", body}},
        Errc::ServiceUnavailable);
  }

 private:
  std::string ep_;
};

class HttpVkmsAppClient : public VkmsAppClient {
 public:
  explicit HttpVkmsAppClient(std::string ep) : ep_(std::move(ep)) {}

  AppKeyResult app_get_key(const std::string& initiator_app,
                           const std::string& target_app,
                           std::size_t size_bits) override {
    json j = post_json(ep_, "/api/v1/keys/" + target_app + "/enc_keys",
                       {{"caller", initiator_app}, {"size", size_bits}},
                       Errc::ServiceUnavailable);
    return app_result_from_json(j);
  }

  AppKeyResult app_get_key_with_id(const std::string& caller_app,
                                   const std::string& key_id) override {
    json ids = json::array();
    ids.push_back({{"key_ID", key_id}});
    json j = post_json(ep_, "/api/v1/keys/" + caller_app + "/dec_keys",
                       {{"key_IDs", ids}}, Errc::ServiceUnavailable);
    return app_result_from_json(j);
  }

 private:
  std::string ep_;
};

}  // namespace

struct HttpHost::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpHost::HttpHost() : impl_(new Impl) {}

HttpHost::~HttpHost() { stop(); }

void HttpHost::serve_qusec(Qusec& svc) {
  auto& s = impl_->server;
  Qusec* q = &svc;

  s.Post("/register_node",
         [q](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             q->register_node(parse_body(req).get<NodeDescriptor>());
             return json::object();
           });
         });

  s.Post("/register_link",
         [q](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             q->register_link(parse_body(req).get<QkdLinkInfo>());
             return json::object();
           });
         });

  s.Post("/security_level_request",
         [q](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             SecurityLevel lvl = q->assign_security_level(
                 b.at("src_app").get<std::string>(),
                 b.at("dst_app").get<std::string>());
             return json{{"level", level_name(lvl)}};
           });
         });

  s.Post("/configuration_request",
         [q](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             SessionPolicy p = q->configuration_request(
                 b.at("src_app").get<std::string>(),
                 b.at("dst_app").get<std::string>(),
                 level_from_name(b.at("level").get<std::string>()),
                 b.at("out_len_bits").get<std::size_t>());
             return json(p);
           });
         });

  s.Post("/session_lookup",
         [q](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             SessionLookup lk = q->lookup_session_for_target(
                 b.at("target_app").get<std::string>(),
                 b.at("key_id").get<std::string>());
             return json{{"session_id", lk.session_id},
                         {"level", level_name(lk.level)},
                         {"initiator_app", lk.initiator_app},
                         {"target_app", lk.target_app},
                         {"state", lk.state}};
           });
         });

  s.Post("/report_derived",
         [q](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             q->report_derived(b.at("session_id").get<std::string>(),
                               b.at("key_id").get<std::string>());
             return json::object();
           });
         });

  s.Get("/stats", [q](const httplib::Request&, httplib::Response& res) {
    handle(res, [&]() -> json {
      QusecStats st = q->stats();
      return json{{"level_requests", st.level_requests},
                  {"config_requests", st.config_requests},
                  {"session_lookups", st.session_lookups},
                  {"derived_reports", st.derived_reports}};
    });
  });

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    handle(res, []() -> json { return json{{"status", "ok"}}; });
  });
}

void HttpHost::serve_kms(KmsService& svc) {
  auto& s = impl_->server;
  KmsService* k = &svc;

  s.Post(R"(/api/v1/keys/([^/]+)/enc_keys)",
         [k](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             std::string peer = req.matches[1];
             return keys_to_json(k->get_key(b.value("caller", ""), peer,
                                            b.value("number", std::size_t{1}),
                                            b.value("size", std::size_t{0})));
           });
         });

  s.Post(R"(/api/v1/keys/([^/]+)/dec_keys)",
         [k](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             std::string caller = req.matches[1];
             std::vector<std::string> ids;
             for (const auto& e : b.at("key_IDs"))
               ids.push_back(e.at("key_ID").get<std::string>());
             return keys_to_json(k->get_key_with_id(caller, ids));
           });
         });

  s.Get(R"(/api/v1/keys/([^/]+)/status)",
        [k](const httplib::Request& req, httplib::Response& res) {
          handle(res, [&]() -> json {
            std::string peer = req.matches[1];
            KmsStatus st = k->status(peer);
            return json{{"stored_key_count", st.stored_key_count},
                        {"key_size", st.key_size_bits},
                        {"link_up", st.link_up}};
          });
        });

  s.Post("/relay/rules",
         [k](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             k->install_relay_rule(parse_body(req).get<RelayRule>());
             return json::object();
           });
         });

  s.Post("/relay/rules/remove",
         [k](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             k->remove_relay_rule(
                 parse_body(req).at("session_id").get<std::string>());
             return json::object();
           });
         });

  s.Post("/relay/forward",
         [k](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             RelayEnvelope env;
             env.session_id = b.at("session_id").get<std::string>();
             env.key_id = b.at("key_id").get<std::string>();
             env.payload = from_base64(b.at("payload").get<std::string>());
             env.pad_key_id = b.value("pad_key_id", "");
             k->forward_relayed_key(env);
             return json::object();
           });
         });

  s.Post("/relay/fetch",
         [k](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             KeyWithId kw = k->fetch_relayed(
                 parse_body(req).at("session_id").get<std::string>());
             return json{{"key_ID", kw.key_id},
                         {"key", to_base64(kw.key.bytes())}};
           });
         });

  s.Get("/health", [k](const httplib::Request&, httplib::Response& res) {
    handle(res, [&]() -> json {
      return json{{"status", "ok"},
                  {"kms_id", k->kms_id()},
                  {"node_id", k->node_id()}};
    });
  });
}

void HttpHost::serve_vkms(Vkms& svc) {
  auto& s = impl_->server;
  Vkms* v = &svc;

  s.Post("/policy/install",
         [v](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             v->install_policy(parse_body(req).get<SessionPolicy>());
             return json::object();
           });
         });

  s.Post("/policy/remove",
         [v](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             v->remove_policy(
                 parse_body(req).at("session_id").get<std::string>());
             return json::object();
           });
         });

  s.Post("/session_message",
         [v](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             return v->session_message(b.at("session_id").get<std::string>(),
                                       b.at("type").get<std::string>(),
                                       b.value("body", json::object()));
           });
         });

  s.Post(R"(/api/v1/keys/([^/]+)/enc_keys)",
         [v](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             std::string target = req.matches[1];
             AppKeyResult r = v->app_get_key(b.value("caller", ""), target,
                                             b.value("size", std::size_t{256}));
             return app_result_to_json(r);
           });
         });

  s.Post(R"(/api/v1/keys/([^/]+)/dec_keys)",
         [v](const httplib::Request& req, httplib::Response& res) {
           handle(res, [&]() -> json {
             json b = parse_body(req);
             std::string caller = req.matches[1];
             AppKeyResult r = v->app_get_key_with_id(
                 caller, b.at("key_IDs").at(0).at("key_ID").get<std::string>());
             return app_result_to_json(r);
           });
         });

  s.Get("/health", [v](const httplib::Request&, httplib::Response& res) {
    handle(res, [&]() -> json {
      return json{{"status", "ok"}, {"node_id", v->config().node_id}};
    });
  });
}

void HttpHost::bind(int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    port_ = srv.bind_to_any_port("127.0.0.1");
    if (port_ <= 0)
      throw Error(Errc::ServiceUnavailable, "cannot bind a loopback port");
  } else {
    if (!srv.bind_to_port("127.0.0.1", port))
      throw Error(Errc::ServiceUnavailable,
                  "cannot bind 127.0.0.1:" + std::to_string(port));
    port_ = port;
  }
}

void HttpHost::listen() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpHost::stop() {
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

std::string HttpHost::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

std::shared_ptr<QusecClient> HttpClientFactory::qusec(
    const std::string& endpoint) {
  return std::make_shared<HttpQusecClient>(endpoint);
}

std::shared_ptr<KmsClient> HttpClientFactory::kms(const std::string& endpoint) {
  return std::make_shared<HttpKmsClient>(endpoint);
}

std::shared_ptr<VkmsClient> HttpClientFactory::vkms(
    const std::string& endpoint) {
  return std::make_shared<HttpVkmsClient>(endpoint);
}

std::shared_ptr<VkmsAppClient> make_http_app_client(
    const std::string& endpoint) {
  return std::make_shared<HttpVkmsAppClient>(endpoint);
}

}  // namespace qsnet
