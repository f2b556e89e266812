#pragma once

// WebSocket endpoint for the operator console. Inbound text frames go to a
// handler; broadcast() fans a message out to every connected client.

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace puppetai {

class ConsoleServer {
 public:
  // Returns messages to send back to the sender only (e.g. error replies).
  using Handler = std::function<std::vector<std::string>(const std::string& text)>;

  // port 0 picks a free port.
  ConsoleServer(const std::string& host, unsigned short port, Handler handler);
  ~ConsoleServer();
  ConsoleServer(const ConsoleServer&) = delete;
  ConsoleServer& operator=(const ConsoleServer&) = delete;

  unsigned short port() const noexcept;
  std::size_t client_count() const noexcept;

  // Thread-safe.
  void broadcast(std::string text);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace puppetai
