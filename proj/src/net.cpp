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
#include "pacas/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include <spdlog/spdlog.h>

#include "pacas/error.hpp"

namespace pacas {

namespace {

nlohmann::json failure(ErrorCode code, const std::string& message) {
  return {{"ok", false}, {"error", std::string(error_code_name(code))}, {"message", message}};
}

ClientTuple tuple_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kProtocol, "tuple must be an object");
  ClientTuple t;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw Error(ErrorCode::kProtocol, "tuple value for '" + k + "' must be a string");
    t.emplace(k, v.get<std::string>());
  }
  return t;
}

nlohmann::json dispatch(ProviderSession& session, const nlohmann::json& msg) {
  if (!msg.is_object() || !msg.contains("op") || !msg["op"].is_string()) {
    throw Error(ErrorCode::kProtocol, "message needs a string 'op'");
  }
  const std::string op = msg["op"].get<std::string>();
  if (op == "info") {
    return {{"ok", true},
            {"support_size", session.support().size()},
            {"support_weight", price_to_json(session.support().total_weight())}};
  }
  if (!msg.contains("request")) throw Error(ErrorCode::kProtocol, "message needs a 'request'");
  const ValueRequest request = ValueRequest::from_json(msg["request"]);
  const ClientTuple tuple = tuple_from_json(msg.value("tuple", nlohmann::json::object()));
  if (op == "ask_price") {
    return {{"ok", true}, {"price", price_to_json(session.ask_price(request, tuple))}};
  }
  if (op == "pay") {
    if (!msg.contains("price")) throw Error(ErrorCode::kProtocol, "pay needs a 'price'");
    const Price price = price_from_json(msg["price"]);
    if (!price) throw Error(ErrorCode::kUnsafeRequest, "cannot pay an infinite price");
    const Disclosure d = session.pay(*price, request, tuple);
    return {{"ok", true}, {"value", d.value}, {"level", d.level}};
  }
  throw Error(ErrorCode::kProtocol, "unknown op '" + op + "'");
}

[[noreturn]] void sys_fail(const std::string& what) {
  throw Error(ErrorCode::kProtocol, what + ": " + std::strerror(errno));
}

}  // namespace

std::string handle_request(ProviderSession& session, std::string_view line) {
  nlohmann::json reply;
  try {
    reply = dispatch(session, nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    reply = failure(ErrorCode::kProtocol, e.what());
  } catch (const Error& e) {
    reply = failure(e.code(), e.what());
  } catch (const std::exception& e) {
    reply = failure(ErrorCode::kProtocol, e.what());
  }
  return reply.dump();
}

void serve_stream(ProviderSession& session, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    out << handle_request(session, line) << '\n';
    out.flush();
  }
}

LineSocket::~LineSocket() {
  if (fd_ >= 0) ::close(fd_);
}

LineSocket LineSocket::connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kProtocol, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) sys_fail("connect " + host + ":" + service);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return LineSocket(fd);
}

void LineSocket::write_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("send");
    }
    off += static_cast<size_t>(n);
  }
}

bool LineSocket::read_line(std::string& line) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      line.assign(buffer_, 0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("recv");
    }
    if (n == 0) {
      if (buffer_.empty()) return false;
      line = std::move(buffer_);
      buffer_.clear();
      return true;
    }
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

void LineSocket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Money RemoteProvider::support_weight() {
  const auto reply = call({{"op", "info"}});
  if (!reply.contains("support_weight")) throw Error(ErrorCode::kProtocol, "reply lacks 'support_weight'");
  const Price w = price_from_json(reply["support_weight"]);
  if (!w) throw Error(ErrorCode::kProtocol, "support weight cannot be infinite");
  return *w;
}

std::unique_ptr<RemoteProvider> RemoteProvider::connect(const std::string& host, std::uint16_t port) {
  return std::make_unique<RemoteProvider>(LineSocket::connect(host, port));
}

nlohmann::json RemoteProvider::call(const nlohmann::json& message) {
  socket_.write_line(message.dump());
  std::string line;
  if (!socket_.read_line(line)) throw Error(ErrorCode::kProtocol, "provider closed the connection");
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("unreadable reply: ") + e.what());
  }
  if (!reply.is_object() || !reply.contains("ok")) throw Error(ErrorCode::kProtocol, "reply lacks 'ok'");
  if (!reply["ok"].get<bool>()) {
    const std::string code = reply.value("error", "protocol_error");
    throw Error(error_code_from_name(code), reply.value("message", code));
  }
  return reply;
}

Price RemoteProvider::ask_price(const ValueRequest& r, const ClientTuple& t) {
  const auto reply = call({{"op", "ask_price"}, {"request", r.to_json()}, {"tuple", t}});
  if (!reply.contains("price")) throw Error(ErrorCode::kProtocol, "reply lacks 'price'");
  return price_from_json(reply["price"]);
}

Disclosure RemoteProvider::pay(Money price, const ValueRequest& r, const ClientTuple& t) {
  const auto reply =
      call({{"op", "pay"}, {"price", price_to_json(price)}, {"request", r.to_json()}, {"tuple", t}});
  try {
    return {reply.at("value").get<std::string>(), reply.at("level").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("bad pay reply: ") + e.what());
  }
}

Server::Server(SessionFactory factory, std::string host, std::uint16_t port)
    : factory_(std::move(factory)), host_(std::move(host)), port_(port) {}

Server::~Server() { stop(); }

void Server::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port_);
  if (int rc = ::getaddrinfo(host_.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kInvalidArgument, "resolve " + host_ + ": " + ::gai_strerror(rc));
  }
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    listen_fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (listen_fd_ < 0) continue;
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(listen_fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(listen_fd_, 16) == 0) break;
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) sys_fail("bind " + host_ + ":" + service);

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  if (::pipe(wake_pipe_) != 0) sys_fail("pipe");
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::accept_loop() {
  for (;;) {
    pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      spdlog::error("poll: {}", std::strerror(errno));
      return;
    }
    if (fds[1].revents || !running_) return;
    if (!(fds[0].revents & POLLIN)) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      spdlog::error("accept: {}", std::strerror(errno));
      return;
    }
    std::lock_guard lock(mu_);
    if (!running_) {
      ::close(fd);
      return;
    }
    live_fds_.insert(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void Server::serve_connection(int fd) {
  LineSocket socket(fd);
  try {
    auto session = factory_();
    spdlog::info("session opened on fd {}", fd);
    std::string line;
    while (socket.read_line(line)) {
      if (line.empty()) continue;
      socket.write_line(handle_request(*session, line));
    }
  } catch (const std::exception& e) {
    spdlog::warn("session on fd {} ended: {}", fd, e.what());
  }
  std::lock_guard lock(mu_);
  live_fds_.erase(fd);
  spdlog::info("session closed on fd {}", fd);
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  if (wake_pipe_[1] >= 0) {
    const char b = 0;
    [[maybe_unused]] auto n = ::write(wake_pipe_[1], &b, 1);
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  ::close(listen_fd_);
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
  listen_fd_ = wake_pipe_[0] = wake_pipe_[1] = -1;
}

}  // namespace pacas
