#include "puppetai/stub_chat_server.hpp"

#include <httplib.h>

namespace puppetai {

StubChatServer::StubChatServer(std::vector<std::string> replies, std::string path)
    : server_(std::make_unique<httplib::Server>()), path_(std::move(path)), replies_(std::move(replies)) {
  server_->Post(path_, [this](const httplib::Request& req, httplib::Response& res) {
    std::string content;
    std::chrono::milliseconds delay{0};
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(nlohmann::json::parse(req.body, nullptr, false));
      auth_.push_back(req.get_header_value("Authorization"));
      if (!replies_.empty()) content = replies_[std::min(served_, replies_.size() - 1)];
      ++served_;
      delay = delay_;
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    res.set_content(nlohmann::json{{"content", content}}.dump(), "application/json");
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

StubChatServer::~StubChatServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubChatServer::url() const { return "http://127.0.0.1:" + std::to_string(port_) + path_; }

void StubChatServer::set_delay(std::chrono::milliseconds delay) {
  std::lock_guard lock(mutex_);
  delay_ = delay;
}

std::vector<nlohmann::json> StubChatServer::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::vector<std::string> StubChatServer::authorization_headers() const {
  std::lock_guard lock(mutex_);
  return auth_;
}

}  // namespace puppetai
