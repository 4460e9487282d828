#ifndef CWP_STUB_SERVER_H_
#define CWP_STUB_SERVER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

// A small OpenAI-compatible chat-completion server for tests and offline runs.
namespace cwp::stub {

struct Reply {
  int status = 200;
  std::string content;  // assistant message; ignored unless status is 2xx
};

struct StubRequest {
  std::size_t number = 0;       // 1-based arrival order
  std::size_t occurrence = 0;   // 1-based count of this exact prompt so far
  std::string model;
  std::string content;
  double temperature = 0.0;
  int max_tokens = 0;
};

using Responder = std::function<Reply(const StubRequest&)>;

// Deterministic answers. Verb prompts get a category line ("5. Communication");
// check-worthiness prompts get Yes or No from surface cues of the sentence,
// flipped for a small seeded fraction of (sentence, occurrence) pairs so that
// repeated runs are not perfectly consistent.
std::string default_reply(const StubRequest& request, std::uint64_t seed);

Responder default_responder(std::uint64_t seed);

class StubChatServer {
 public:
  explicit StubChatServer(Responder responder);
  ~StubChatServer();
  StubChatServer(const StubChatServer&) = delete;
  StubChatServer& operator=(const StubChatServer&) = delete;

  // Binds host:port (port 0 picks a free one) and serves on a background
  // thread. Throws std::runtime_error if the bind fails.
  void start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  int port() const { return port_; }
  std::string base_url() const;

  std::size_t request_count() const;
  std::vector<StubRequest> requests() const;

 private:
  Reply handle(StubRequest& request);

  Responder responder_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::vector<StubRequest> log_;
  std::map<std::string, std::size_t> seen_;
};

}  // namespace cwp::stub

#endif  // CWP_STUB_SERVER_H_
