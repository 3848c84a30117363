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

#include "qsnet/inproc.hpp"

#include "qsnet/errors.hpp"

namespace qsnet {

namespace {

class InprocQusecClient final : public QusecClient {
 public:
  InprocQusecClient(InprocHub* hub, std::string endpoint)
      : hub_(hub), endpoint_(std::move(endpoint)) {}

  void register_node(const NodeDescriptor& node) override {
    target()->register_node(node);
  }
  void register_link(const QkdLinkInfo& link) override {
    target()->register_link(link);
  }
  SecurityLevel security_level_request(const std::string& src_app,
                                       const std::string& dst_app) override {
    return target()->assign_security_level(src_app, dst_app);
  }
  SessionPolicy configuration_request(const std::string& src_app,
                                      const std::string& dst_app, SecurityLevel level,
                                      std::size_t out_len_bits) override {
    return target()->configuration_request(src_app, dst_app, level, out_len_bits);
  }
  SessionLookup session_lookup(const std::string& target_app,
                               const std::string& key_id) override {
    return target()->lookup_session_for_target(target_app, key_id);
  }
  void report_derived(const std::string& session_id,
                      const std::string& key_id) override {
    target()->report_derived(session_id, key_id);
  }
  QusecStats stats() override { return target()->stats(); }

 private:
  std::shared_ptr<Qusec> target() const { return hub_->qusec_at(endpoint_, true); }
  InprocHub* hub_;
  std::string endpoint_;
};

class InprocKmsClient final : public KmsClient {
 public:
  InprocKmsClient(InprocHub* hub, std::string endpoint)
      : hub_(hub), endpoint_(std::move(endpoint)) {}

  std::vector<KeyWithId> get_key(const std::string& caller_app,
                                 const std::string& peer, std::size_t number,
                                 std::size_t size_bits) override {
    return target()->get_key(caller_app, peer, number, size_bits);
  }
  std::vector<KeyWithId> get_key_with_id(
      const std::string& caller_app, const std::vector<std::string>& key_ids) override {
    return target()->get_key_with_id(caller_app, key_ids);
  }
  KmsStatus status(const std::string& peer) override { return target()->status(peer); }
  void install_relay_rule(const RelayRule& rule) override {
    target()->install_relay_rule(rule);
  }
  void remove_relay_rule(const std::string& session_id) override {
    target()->remove_relay_rule(session_id);
  }
  void forward_relayed_key(const RelayEnvelope& env) override {
    auto tamper = hub_->forward_tamper();
    if (tamper) {
      RelayEnvelope copy = env;
      tamper(endpoint_, copy);
      target()->forward_relayed_key(copy);
      return;
    }
    target()->forward_relayed_key(env);
  }
  KeyWithId fetch_relayed(const std::string& session_id) override {
    return target()->fetch_relayed(session_id);
  }
  void ping() override { target(); }

 private:
  std::shared_ptr<KmsService> target() const { return hub_->kms_at(endpoint_); }
  InprocHub* hub_;
  std::string endpoint_;
};

class InprocVkmsClient final : public VkmsClient {
 public:
  InprocVkmsClient(InprocHub* hub, std::string endpoint)
      : hub_(hub), endpoint_(std::move(endpoint)) {}

  void install_policy(const SessionPolicy& policy) override {
    target()->install_policy(policy);
  }
  void remove_policy(const std::string& session_id) override {
    target()->remove_policy(session_id);
  }
  nlohmann::json session_message(const std::string& session_id,
                                 const std::string& type,
                                 const nlohmann::json& body) override {
    auto tamper = hub_->message_tamper();
    if (tamper) {
      std::string t = type;
      nlohmann::json b = body;
      tamper(endpoint_, session_id, t, b);
      return target()->session_message(session_id, t, b);
    }
    return target()->session_message(session_id, type, body);
  }

 private:
  std::shared_ptr<Vkms> target() const { return hub_->vkms_at(endpoint_); }
  InprocHub* hub_;
  std::string endpoint_;
};

class InprocFactory final : public ClientFactory {
 public:
  explicit InprocFactory(InprocHub* hub) : hub_(hub) {}

  std::shared_ptr<QusecClient> qusec(const std::string& endpoint) override {
    return std::make_shared<InprocQusecClient>(hub_, endpoint);
  }
  std::shared_ptr<KmsClient> kms(const std::string& endpoint) override {
    return std::make_shared<InprocKmsClient>(hub_, endpoint);
  }
  std::shared_ptr<VkmsClient> vkms(const std::string& endpoint) override {
    return std::make_shared<InprocVkmsClient>(hub_, endpoint);
  }

 private:
  InprocHub* hub_;
};

}  // namespace

void InprocHub::add_qusec(const std::string& id, std::shared_ptr<Qusec> q) {
  std::lock_guard lock(mu_);
  qusecs_[id] = std::move(q);
}

void InprocHub::add_kms(const std::string& id, std::shared_ptr<KmsService> k) {
  std::lock_guard lock(mu_);
  kmss_[id] = std::move(k);
}

void InprocHub::add_vkms(const std::string& id, std::shared_ptr<Vkms> v) {
  std::lock_guard lock(mu_);
  vkmss_[id] = std::move(v);
}

void InprocHub::set_down(const std::string& id, bool down) {
  std::lock_guard lock(mu_);
  if (down)
    down_.insert(id);
  else
    down_.erase(id);
}

void InprocHub::set_message_tamper(MessageTamper t) {
  std::lock_guard lock(mu_);
  message_tamper_ = std::move(t);
}

void InprocHub::set_forward_tamper(ForwardTamper t) {
  std::lock_guard lock(mu_);
  forward_tamper_ = std::move(t);
}

InprocHub::MessageTamper InprocHub::message_tamper() const {
  std::lock_guard lock(mu_);
  return message_tamper_;
}

InprocHub::ForwardTamper InprocHub::forward_tamper() const {
  std::lock_guard lock(mu_);
  return forward_tamper_;
}

std::shared_ptr<ClientFactory> InprocHub::factory() {
  return std::make_shared<InprocFactory>(this);
}

std::string InprocHub::strip(const std::string& endpoint, bool controller) const {
  const std::string prefix = "inproc:";
  if (endpoint.rfind(prefix, 0) != 0)
    throw Error(controller ? Errc::ControllerUnreachable : Errc::ServiceUnavailable,
                "not an in-process endpoint: '" + endpoint + "'");
  std::string id = endpoint.substr(prefix.size());
  if (down_.count(id))
    throw Error(controller ? Errc::ControllerUnreachable : Errc::ServiceUnavailable,
                "service '" + id + "' is down");
  return id;
}

std::shared_ptr<Qusec> InprocHub::qusec_at(const std::string& endpoint,
                                           bool controller) const {
  std::lock_guard lock(mu_);
  auto it = qusecs_.find(strip(endpoint, controller));
  if (it == qusecs_.end())
    throw Error(Errc::ControllerUnreachable, "no controller at '" + endpoint + "'");
  return it->second;
}

std::shared_ptr<KmsService> InprocHub::kms_at(const std::string& endpoint) const {
  std::lock_guard lock(mu_);
  auto it = kmss_.find(strip(endpoint, false));
  if (it == kmss_.end())
    throw Error(Errc::ServiceUnavailable, "no KMS at '" + endpoint + "'");
  return it->second;
}

std::shared_ptr<Vkms> InprocHub::vkms_at(const std::string& endpoint) const {
  std::lock_guard lock(mu_);
  auto it = vkmss_.find(strip(endpoint, false));
  if (it == vkmss_.end())
    throw Error(Errc::ServiceUnavailable, "no vKMS at '" + endpoint + "'");
  return it->second;
}

}  // namespace qsnet
