#include "cwp/stub_server.h"

#include <array>
#include <cctype>
#include <stdexcept>

#include "cwp/rng.h"
#include "cwp/text.h"
#include "cwp/verbtax.h"
#include "httplib.h"
#include "json.hpp"

namespace cwp::stub {
namespace {

constexpr std::string_view kVerbPrefix = "Classify the verb '";
constexpr std::string_view kInputMarker = "### Input Sentence: ";
constexpr std::string_view kResponseMarker = "\n\n### Response:";

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct KnownVerb {
  std::string_view verb;
  int category;
};

constexpr std::array<KnownVerb, 40> kKnownVerbs{{
    {"say", 5},     {"tell", 5},     {"discuss", 5}, {"announce", 5},  {"claim", 5},
    {"report", 5},  {"vote", 5},     {"ask", 5},     {"build", 4},     {"create", 4},
    {"destroy", 4}, {"make", 4},     {"cut", 4},     {"think", 2},     {"believe", 2},
    {"know", 2},    {"decide", 2},   {"run", 1},     {"hit", 1},       {"pay", 1},
    {"walk", 6},    {"go", 6},       {"come", 6},    {"move", 6},      {"hope", 7},
    {"love", 7},    {"fear", 7},     {"want", 7},    {"see", 8},       {"hear", 8},
    {"watch", 8},   {"be", 9},       {"have", 9},    {"become", 9},    {"seem", 9},
    {"grow", 3},    {"increase", 3}, {"rise", 3},    {"fall", 3},      {"change", 3},
}};

constexpr std::array<std::string_view, 18> kClaimWords{
    "percent", "million", "billion", "thousand", "tax", "taxes", "jobs", "law",
    "voted", "passed", "increased", "decreased", "cut", "budget", "deficit",
    "unemployment", "spent", "record"};

std::string verb_reply(std::string_view verb) {
  int category = static_cast<int>(fnv1a(verb) % 10) + 1;
  for (const KnownVerb& k : kKnownVerbs) {
    if (k.verb == verb) category = k.category;
  }
  const auto c = *verbtax::from_ordinal(category);
  return std::to_string(category) + ". " + std::string(verbtax::display_name(c));
}

bool looks_checkworthy(std::string_view sentence) {
  for (char c : sentence) {
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
  }
  for (const std::string& token : text::tokenize_words(sentence)) {
    const std::string t = text::fold(token);
    for (std::string_view w : kClaimWords) {
      if (t == w) return true;
    }
  }
  return false;
}

}  // namespace

std::string default_reply(const StubRequest& request, std::uint64_t seed) {
  const std::string_view content = request.content;
  if (content.starts_with(kVerbPrefix)) {
    const std::size_t end = content.find('\'', kVerbPrefix.size());
    return verb_reply(content.substr(kVerbPrefix.size(), end - kVerbPrefix.size()));
  }
  const std::size_t in = content.find(kInputMarker);
  if (in == std::string_view::npos) return "I can only classify statements.";
  const std::size_t start = in + kInputMarker.size();
  const std::size_t end = content.find(kResponseMarker, start);
  const std::string_view sentence = content.substr(start, end - start);

  bool yes = looks_checkworthy(sentence);
  const std::uint64_t h = mix64(fnv1a(sentence) ^ mix64(seed) ^ mix64(request.occurrence));
  if (h % 100 < 6) yes = !yes;
  switch ((h >> 8) % 4) {
    case 0: return yes ? "Yes" : "No";
    case 1: return yes ? "Yes." : "No.";
    case 2: return yes ? "Yes, the statement is check-worthy." : "No, this is an opinion.";
    default: return yes ? " yes" : " no";
  }
}

Responder default_responder(std::uint64_t seed) {
  return [seed](const StubRequest& r) { return Reply{200, default_reply(r, seed)}; };
}

StubChatServer::StubChatServer(Responder responder)
    : responder_(std::move(responder)), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/v1/chat/completions", [this](const httplib::Request& req,
                                               httplib::Response& res) {
    const auto doc = nlohmann::json::parse(req.body, nullptr, false);
    StubRequest request;
    try {
      if (doc.is_discarded()) throw std::invalid_argument("body is not JSON");
      request.model = doc.at("model").get<std::string>();
      request.content = doc.at("messages").at(0).at("content").get<std::string>();
      request.temperature = doc.value("temperature", 1.0);
      request.max_tokens = doc.value("max_tokens", 0);
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", {{"message", e.what()}}}}.dump(),
                      "application/json");
      return;
    }
    const Reply reply = handle(request);
    res.status = reply.status;
    if (reply.status < 200 || reply.status >= 300) {
      res.set_content(nlohmann::json{{"error", {{"message", "stub failure"}}}}.dump(),
                      "application/json");
      return;
    }
    const nlohmann::json body = {
        {"id", "stub-" + std::to_string(request.number)},
        {"object", "chat.completion"},
        {"model", request.model},
        {"choices",
         nlohmann::json::array({{{"index", 0},
                                 {"message", {{"role", "assistant"}, {"content", reply.content}}},
                                 {"finish_reason", "stop"}}})},
    };
    res.set_content(body.dump(), "application/json");
  });
}

StubChatServer::~StubChatServer() { stop(); }

Reply StubChatServer::handle(StubRequest& request) {
  {
    std::lock_guard lock(mu_);
    request.number = log_.size() + 1;
    request.occurrence = ++seen_[request.content];
    log_.push_back(request);
  }
  return responder_(request);
}

void StubChatServer::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("stub server could not bind " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void StubChatServer::stop() {
  if (thread_.joinable()) {
    server_->stop();
    thread_.join();
  }
}

std::string StubChatServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

std::size_t StubChatServer::request_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::vector<StubRequest> StubChatServer::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace cwp::stub
