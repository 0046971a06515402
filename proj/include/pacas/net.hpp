//
// Copyright 2026 The PACAS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pacas/provider.hpp"

namespace pacas {

// Answers one NDJSON request line against a session. Never throws; failures
// become {"ok":false,"error":code,"message":...}.
std::string handle_request(ProviderSession& session, std::string_view line);

// Serves newline-delimited requests from in until EOF.
void serve_stream(ProviderSession& session, std::istream& in, std::ostream& out);

// Blocking line-oriented socket.
class LineSocket {
 public:
  explicit LineSocket(int fd) : fd_(fd) {}
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;
  LineSocket(LineSocket&& o) noexcept : fd_(o.fd_), buffer_(std::move(o.buffer_)) { o.fd_ = -1; }
  ~LineSocket();

  static LineSocket connect(const std::string& host, std::uint16_t port);

  void write_line(std::string_view line);
  // False on orderly EOF before any byte of a new line.
  bool read_line(std::string& line);
  void shutdown();
  int fd() const { return fd_; }

 private:
  int fd_ = -1;
  std::string buffer_;
};

// Client side of the wire protocol. Provider error codes come back as
// pacas::Error with the matching ErrorCode.
class RemoteProvider : public ProviderEndpoint {
 public:
  explicit RemoteProvider(LineSocket socket) : socket_(std::move(socket)) {}
  static std::unique_ptr<RemoteProvider> connect(const std::string& host, std::uint16_t port);

  Price ask_price(const ValueRequest& r, const ClientTuple& t) override;
  Disclosure pay(Money price, const ValueRequest& r, const ClientTuple& t) override;
  Money support_weight() override;

 private:
  nlohmann::json call(const nlohmann::json& message);

  LineSocket socket_;
};

// TCP listener with one thread and one fresh session per connection.
class Server {
 public:
  using SessionFactory = std::function<std::unique_ptr<ProviderSession>()>;

  Server(SessionFactory factory, std::string host, std::uint16_t port);
  ~Server();

  // Binds and starts accepting; port 0 picks an ephemeral port.
  void start();
  std::uint16_t port() const { return port_; }
  // Stops accepting, closes live connections and joins all threads.
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  SessionFactory factory_;
  std::string host_;
  std::uint16_t port_;
  int listen_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::set<int> live_fds_;
};

}  // namespace pacas
