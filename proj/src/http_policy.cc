// Copyright 2026 The ft-evolve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <fstream>
#include <thread>

#include "ftevolve/policy.h"
#include "httplib.h"
#include "json.hpp"

namespace ftevolve {
namespace {

using json = nlohmann::json;

struct SemaphoreGuard {
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
  std::counting_semaphore<>& sem;
};

bool Retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpPolicy::HttpPolicy(HttpPolicyConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
  const std::string& url = config_.base_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.size() == scheme_end + 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint base URL must look like http(s)://host[:port][/path], got '" +
                    url + "'");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported URL scheme '" + scheme + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") {
    throw Error(ErrorCode::kInvalidArgument, "built without TLS support; use http://");
  }
#endif
  const std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

HttpPolicy::~HttpPolicy() = default;

void HttpPolicy::Audit(const std::string& line) {
  if (config_.audit_log_path.empty()) return;
  std::lock_guard<std::mutex> lock(audit_mu_);
  std::ofstream out(config_.audit_log_path, std::ios::app);
  out << line << '\n';
}

std::string HttpPolicy::Generate(const PromptBundle& prompt,
                                 const SamplingSettings& settings,
                                 std::uint64_t /*seed*/) {
  json request = {
      {"model", config_.model},
      {"messages",
       json::array({{{"role", "system"}, {"content", prompt.system_text}},
                    {{"role", "user"}, {"content", prompt.UserText()}}})},
      {"temperature", settings.temperature},
      {"top_p", settings.top_p},
      {"max_tokens", settings.max_new_tokens},
  };
  if (config_.send_top_k) request["top_k"] = settings.top_k;
  const std::string body = request.dump();
  const std::string path = path_prefix_ + "/chat/completions";

  SemaphoreGuard guard(in_flight_);
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(std::chrono::seconds(config_.timeout_seconds));
  client.set_read_timeout(std::chrono::seconds(config_.timeout_seconds));
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string last_problem;
  int backoff_ms = config_.initial_backoff_ms;
  for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    httplib::Result res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_problem = "connection failed: " + httplib::to_string(res.error());
      Audit(json{{"request", request}, {"attempt", attempt}, {"error", last_problem}}.dump());
      continue;
    }
    Audit(json{{"request", request},
               {"attempt", attempt},
               {"status", res->status},
               {"response", res->body}}
              .dump());
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::kAuthFailure,
                  "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (Retryable(res->status)) {
      last_problem = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kMalformedEndpointResponse,
                  "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      const json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedEndpointResponse, e.what());
    }
  }
  throw Error(ErrorCode::kEndpointUnreachable,
              scheme_host_port_ + path + " after " +
                  std::to_string(config_.max_attempts) + " attempts: " + last_problem);
}

}  // namespace ftevolve
