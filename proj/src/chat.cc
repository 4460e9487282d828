#include "cwp/chat.h"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "cwp/error.h"
#include "cwp/io.h"
#include "cwp/text.h"
#include "httplib.h"
#include "json.hpp"

namespace cwp::llm {
namespace {

constexpr std::string_view kCompletionsPath = "/v1/chat/completions";

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void ExchangeLog::append(ChatExchange exchange) {
  std::lock_guard lock(mu_);
  exchanges_.push_back(std::move(exchange));
}

std::vector<ChatExchange> ExchangeLog::snapshot() const {
  std::lock_guard lock(mu_);
  return exchanges_;
}

std::size_t ExchangeLog::size() const {
  std::lock_guard lock(mu_);
  return exchanges_.size();
}

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  double ms = static_cast<double>(initial_backoff.count());
  for (int i = 1; i < attempt; ++i) ms *= multiplier;
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::string build_request_body(const ChatRequest& request) {
  nlohmann::json body;
  body["model"] = request.model;
  body["messages"] = nlohmann::json::array(
      {{{"role", "user"}, {"content", request.content}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  return body.dump();
}

std::string parse_response_body(std::string_view body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw EndpointError("response is not valid JSON");
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    throw EndpointError("response has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") ||
      !first["message"].is_object() || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw EndpointError("response lacks choices[0].message.content");
  }
  return first["message"]["content"].get<std::string>();
}

HttpChatClient::HttpChatClient(Endpoint endpoint, RetryPolicy retry, ExchangeLog* log)
    : endpoint_(std::move(endpoint)), retry_(retry), log_(log) {
  if (retry_.max_attempts < 1) throw UsageError("retry.max_attempts must be >= 1");
  const std::string& url = endpoint_.base_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos ||
      (url.compare(0, scheme_end, "http") != 0 && url.compare(0, scheme_end, "https") != 0)) {
    throw UsageError("llm base_url must start with http:// or https://: '" + url + "'");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + std::string(kCompletionsPath);
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  const std::string body = build_request_body(request);
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  }
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(retry_.backoff(attempt - 1));
    const auto started = std::chrono::steady_clock::now();
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(endpoint_.timeout);
    client.set_read_timeout(endpoint_.timeout);
    client.set_write_timeout(endpoint_.timeout);
    const auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw EndpointError("chat completion failed: " + last_error);
    }
    std::string content = parse_response_body(res->body);
    if (log_) {
      log_->append({request, content,
                    std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)});
    }
    return content;
  }
  throw EndpointError("chat completion failed after " +
                      std::to_string(retry_.max_attempts) + " attempts: " + last_error);
}

std::string resolve_api_key(const std::optional<std::filesystem::path>& key_file) {
  if (const char* env = std::getenv("CWP_API_KEY"); env && *env) return env;
  if (!key_file) return {};
  const std::string contents = io::read_file(*key_file);
  const auto rows = text::lines(contents);
  return rows.empty() ? std::string() : std::string(text::trim(rows[0]));
}

}  // namespace cwp::llm
