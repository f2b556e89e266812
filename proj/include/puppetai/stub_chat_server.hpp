#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace puppetai {

// Local HTTP server speaking the chat contract ({model, messages} in,
// {content} out) with scripted replies. Used for hermetic tests of the LLM
// path. Replies are served in order; the last one repeats.
class StubChatServer {
 public:
  explicit StubChatServer(std::vector<std::string> replies, std::string path = "/v1/chat");
  ~StubChatServer();
  StubChatServer(const StubChatServer&) = delete;
  StubChatServer& operator=(const StubChatServer&) = delete;

  std::string url() const;
  int port() const noexcept { return port_; }

  // Delay applied before every reply (to exercise client timeouts).
  void set_delay(std::chrono::milliseconds delay);
  std::vector<nlohmann::json> requests() const;
  std::vector<std::string> authorization_headers() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string path_;
  int port_ = 0;

  mutable std::mutex mutex_;
  std::vector<std::string> replies_;
  std::size_t served_ = 0;
  std::chrono::milliseconds delay_{0};
  std::vector<nlohmann::json> requests_;
  std::vector<std::string> auth_;
};

}  // namespace puppetai
