// Serves the deterministic stub chat endpoint until interrupted.
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "cwp/stub_server.h"

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic OpenAI-compatible chat stub", "cwp-stub-server"};
  std::string host = "127.0.0.1";
  int port = 0;
  std::uint64_t seed = 0;
  std::size_t fail_first = 0;
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port (0 picks a free one)");
  app.add_option("--seed", seed, "Seed for the answer flips");
  app.add_option("--fail-first", fail_first, "Answer the first N requests with HTTP 500");
  CLI11_PARSE(app, argc, argv);

  auto base = cwp::stub::default_responder(seed);
  cwp::stub::StubChatServer server([base, fail_first](const cwp::stub::StubRequest& r) {
    if (r.number <= fail_first) return cwp::stub::Reply{500, ""};
    return base(r);
  });
  try {
    server.start(host, port);
  } catch (const std::exception& e) {
    std::cerr << "cwp-stub-server: " << e.what() << "\n";
    return 1;
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << server.base_url() << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::cerr << "served " << server.request_count() << " requests\n";
  return 0;
}
