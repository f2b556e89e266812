#include "puppetai/console_server.hpp"

#include <deque>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "puppetai/error.hpp"

namespace puppetai {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// Outbound backlog per client; a console that stops reading loses pose
// frames rather than growing memory.
constexpr std::size_t kMaxBacklog = 256;

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, ConsoleServer::Handler& handler, std::atomic<std::size_t>& clients)
      : ws_(std::move(socket)), handler_(handler), clients_(clients) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      ++self->clients_;
      self->read();
    });
  }

  void send(std::shared_ptr<const std::string> text) {
    if (!open_) return;
    if (outbox_.size() >= kMaxBacklog) {
      // Drop the oldest message that is not being written right now.
      outbox_.erase(outbox_.begin() + (writing_ ? 1 : 0));
    }
    outbox_.push_back(std::move(text));
    if (!writing_) write();
  }

  bool open() const { return open_; }

  void close() {
    if (!open_) return;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->closed();
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      for (auto& reply : self->handler_(text)) self->send(std::make_shared<const std::string>(std::move(reply)));
      self->read();
    });
  }

  void write() {
    if (outbox_.empty() || !open_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(*outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->closed();
      self->outbox_.pop_front();
      self->write();
    });
  }

  void closed() {
    if (open_) --clients_;
    open_ = false;
    outbox_.clear();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  ConsoleServer::Handler& handler_;
  std::atomic<std::size_t>& clients_;
  std::deque<std::shared_ptr<const std::string>> outbox_;
  bool open_ = false;
  bool writing_ = false;
};

}  // namespace

struct ConsoleServer::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  Handler handler;
  std::vector<std::weak_ptr<Session>> sessions;
  std::atomic<std::size_t> clients{0};
  std::thread thread;
  unsigned short port = 0;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto s = std::make_shared<Session>(std::move(socket), handler, clients);
      std::erase_if(sessions, [](const std::weak_ptr<Session>& w) { return w.expired(); });
      sessions.push_back(s);
      s->start();
      accept();
    });
  }
};

ConsoleServer::ConsoleServer(const std::string& host, unsigned short port, Handler handler)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  try {
    const tcp::endpoint endpoint(asio::ip::make_address(host), port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
  } catch (const std::exception& e) {
    throw Error(Errc::TransportError, "cannot listen on " + host + ":" + std::to_string(port) + ": " + e.what());
  }
  impl_->port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->thread = std::thread([impl = impl_.get()] { impl->io.run(); });
}

ConsoleServer::~ConsoleServer() { stop(); }

unsigned short ConsoleServer::port() const noexcept { return impl_->port; }

std::size_t ConsoleServer::client_count() const noexcept { return impl_->clients.load(); }

void ConsoleServer::broadcast(std::string text) {
  auto shared = std::make_shared<const std::string>(std::move(text));
  asio::post(impl_->io, [impl = impl_.get(), shared] {
    for (auto& w : impl->sessions)
      if (auto s = w.lock()) s->send(shared);
  });
}

void ConsoleServer::stop() {
  if (!impl_->thread.joinable()) return;
  asio::post(impl_->io, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    for (auto& w : impl->sessions)
      if (auto s = w.lock()) s->close();
  });
  // Give sessions a moment to unwind, then stop the reactor.
  asio::post(impl_->io, [impl = impl_.get()] { impl->io.stop(); });
  impl_->thread.join();
}

}  // namespace puppetai
