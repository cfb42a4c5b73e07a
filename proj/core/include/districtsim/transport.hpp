#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace districtsim::transport {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; a bare port means 127.0.0.1.
  static Endpoint parse(const std::string& text);
  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Newline-delimited byte stream over one TCP connection.
class Connection {
 public:
  Connection() = default;
  explicit Connection(int fd) : fd_(fd) {}
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  bool is_open() const { return fd_ >= 0; }
  /// Writes `line` as is; callers include the terminating newline.
  void send(const std::string& line);
  /// Next line including its newline. Throws TransportError on timeout or when
  /// the peer closes the connection.
  std::string receive_line(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

Connection connect(const Endpoint& endpoint, std::chrono::milliseconds timeout);

class Listener {
 public:
  explicit Listener(const Endpoint& endpoint);
  Listener(Listener&& other) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  /// Bound port, useful after listening on port 0.
  std::uint16_t port() const { return port_; }
  Connection accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace districtsim::transport
