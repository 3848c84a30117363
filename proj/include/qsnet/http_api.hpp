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

// Loopback HTTP transport. Key delivery follows the ETSI GS QKD 014 REST
// shape (enc_keys / dec_keys / status under /api/v1/keys); control and
// session traffic uses service-specific JSON routes. Errors travel as
// {"error": <errc name>, "message": ...} so clients rethrow typed codes.

#pragma once

#include <memory>
#include <string>

#include "qsnet/clients.hpp"

namespace qsnet {

class Qusec;
class KmsService;
class Vkms;

/// Hosts one service instance on 127.0.0.1 with a background accept thread.
/// The served object must outlive the host (or the host must be stopped
/// first).
class HttpHost {
 public:
  HttpHost();
  ~HttpHost();
  HttpHost(const HttpHost&) = delete;
  HttpHost& operator=(const HttpHost&) = delete;

  void serve_qusec(Qusec& svc);
  void serve_kms(KmsService& svc);
  void serve_vkms(Vkms& svc);

  /// Binds 127.0.0.1; port 0 picks a free port (readable via port() right
  /// away, before routes exist). Throws ServiceUnavailable when the bind
  /// fails.
  void bind(int port);
  /// Starts the accept thread. Routes must be registered first.
  void listen();
  void start(int port) {
    bind(port);
    listen();
  }
  void stop();

  int port() const { return port_; }
  std::string endpoint() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Client factory for "http://host:port" endpoints. A fresh connection is
/// opened per request, so the returned clients are thread-safe.
class HttpClientFactory : public ClientFactory {
 public:
  std::shared_ptr<QusecClient> qusec(const std::string& endpoint) override;
  std::shared_ptr<KmsClient> kms(const std::string& endpoint) override;
  std::shared_ptr<VkmsClient> vkms(const std::string& endpoint) override;
};

/// Application-plane client for a remote vKMS.
std::shared_ptr<VkmsAppClient> make_http_app_client(const std::string& endpoint);

}  // namespace qsnet
