#ifndef CWP_CHAT_H_
#define CWP_CHAT_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cwp::llm {

inline constexpr double kDefaultTemperature = 0.03;
inline constexpr int kDefaultMaxTokens = 64;

struct ChatRequest {
  std::string model;
  std::string content;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
};

struct ChatExchange {
  ChatRequest request;
  std::string response;
  std::chrono::milliseconds latency{0};
};

// Append-only, shared between request workers.
class ExchangeLog {
 public:
  void append(ChatExchange exchange);
  std::vector<ChatExchange> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<ChatExchange> exchanges_;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the first choice's message content verbatim. Throws
  // EndpointError once retries are exhausted. Must be thread-safe.
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{5000};

  std::chrono::milliseconds backoff(int attempt) const;  // attempt >= 1
};

struct Endpoint {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;   // empty: no Authorization header
  std::chrono::seconds timeout{120};
};

// Wire body: {"model", "messages": [{"role": "user", "content"}],
// "temperature", "max_tokens"}.
std::string build_request_body(const ChatRequest& request);

// choices[0].message.content; EndpointError if the document is malformed.
std::string parse_response_body(std::string_view body);

// OpenAI-compatible POST {base_url}/v1/chat/completions with bounded retries.
// Transport failures, HTTP 429 and 5xx are retried; other statuses fail at once.
class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(Endpoint endpoint, RetryPolicy retry = {},
                 ExchangeLog* log = nullptr);

  std::string complete(const ChatRequest& request) override;

 private:
  Endpoint endpoint_;
  RetryPolicy retry_;
  ExchangeLog* log_;
  std::string scheme_host_port_;
  std::string path_;
};

// CWP_API_KEY wins; otherwise the first line of key_file, if given.
std::string resolve_api_key(const std::optional<std::filesystem::path>& key_file);

}  // namespace cwp::llm

#endif  // CWP_CHAT_H_
