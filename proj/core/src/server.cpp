//  Copyright 2026 The epochsketch Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#include "epochsketch/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>

#include "epochsketch/error.hpp"

namespace epochsketch {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;
constexpr auto kPollSlice = std::chrono::milliseconds(50);

[[noreturn]] void io_error(const std::string& what) {
  throw Error(ErrorCode::kIo, what + ": " + std::strerror(errno));
}

in_addr resolve(const std::string& host) {
  in_addr addr{};
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, h.c_str(), &addr) != 1) {
    throw Error(ErrorCode::kConfig, "listen host must be an IPv4 address, got '" + host + "'");
  }
  return addr;
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

double system_now() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

std::pair<std::string, std::uint16_t> split_address(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kConfig, "address must be host:port, got '" + std::string(address) + "'");
  }
  std::uint16_t port = 0;
  const std::string_view p = address.substr(colon + 1);
  auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
  if (ec != std::errc{} || end != p.data() + p.size() || p.empty()) {
    throw Error(ErrorCode::kConfig, "bad port in '" + std::string(address) + "'");
  }
  return {std::string(address.substr(0, colon)), port};
}

ServerOptions ServerOptions::from_config(const EngineConfig& config) {
  ServerOptions o;
  std::tie(o.host, o.port) = split_address(config.listen);
  o.live = config.mode == ClockMode::kLive;
  o.epoch_seconds = config.epoch_seconds;
  return o;
}

Server::Server(Engine& engine, ServerOptions options) : engine_(engine), options_(std::move(options)) {}

Server::~Server() { stop(); }

double Server::now() const { return options_.now ? options_.now() : system_now(); }

void Server::start() {
  if (running_) return;
  const in_addr addr = resolve(options_.host);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) io_error("socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr = addr;
  sa.sin_port = htons(options_.port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 || ::listen(listen_fd_, 64) != 0) {
    const int err = errno;
    ::close(listen_fd_);
    listen_fd_ = -1;
    errno = err;
    io_error("cannot listen on " + options_.host + ":" + std::to_string(options_.port));
  }
  socklen_t len = sizeof sa;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
  port_ = ntohs(sa.sin_port);

  if (options_.live) {
    std::unique_lock lock(engine_mu_);
    if (engine_.epoch() == 0 && engine_.origin() == 0) {
      engine_.set_origin(static_cast<std::uint64_t>(std::floor(now() / options_.epoch_seconds)));
    }
  }

  stopping_ = false;
  writer_stop_ = false;
  running_ = true;
  writer_ = std::thread([this] { writer_loop(); });
  acceptor_ = std::thread([this] { accept_loop(); });
  if (options_.live) clock_ = std::thread([this] { clock_loop(); });
}

void Server::stop() {
  if (!running_) return;
  stopping_ = true;
  clock_cv_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  if (clock_.joinable()) clock_.join();
  reap_connections(true);
  {
    std::lock_guard lock(queue_mu_);
    writer_stop_ = true;
  }
  queue_cv_.notify_all();
  if (writer_.joinable()) writer_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
  running_ = false;
}

std::uint64_t Server::enqueue(Command command) {
  std::uint64_t seq;
  {
    std::lock_guard lock(queue_mu_);
    seq = ++next_seq_;
    queue_.emplace_back(seq, std::move(command));
  }
  queue_cv_.notify_one();
  return seq;
}

void Server::wait_applied(std::uint64_t seq) {
  std::unique_lock lock(applied_mu_);
  applied_cv_.wait(lock, [&] { return applied_seq_ >= seq; });
}

void Server::flush() {
  std::uint64_t seq;
  {
    std::lock_guard lock(queue_mu_);
    seq = next_seq_;
  }
  wait_applied(seq);
}

void Server::read(const std::function<void(const Engine&)>& fn) const {
  std::shared_lock lock(engine_mu_);
  fn(engine_);
}

void Server::writer_loop() {
  std::deque<std::pair<std::uint64_t, Command>> batch;
  for (;;) {
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [&] { return !queue_.empty() || writer_stop_; });
      if (queue_.empty()) return;
      batch.swap(queue_);
    }
    std::uint64_t last = 0;
    {
      std::unique_lock lock(engine_mu_);
      for (auto& [seq, command] : batch) {
        try {
          execute(engine_, command, false);
        } catch (const Error&) {
          // Validated before enqueueing; a late failure has no reply channel.
        }
        last = seq;
      }
    }
    batch.clear();
    {
      std::lock_guard lock(applied_mu_);
      applied_seq_ = last;
    }
    applied_cv_.notify_all();
  }
}

std::optional<std::string> Server::handle(std::string_view line, std::uint64_t& last_seq) {
  try {
    Command command = parse_command(line);
    switch (command.kind) {
      case CommandKind::kInsert:
        last_seq = enqueue(std::move(command));
        return std::nullopt;
      case CommandKind::kTick:
        if (options_.live) throw Error(ErrorCode::kInvalidArgument, "TICK is not accepted in live mode");
        last_seq = enqueue(std::move(command));
        return std::nullopt;
      case CommandKind::kDelayedInsert: {
        wait_applied(last_seq);
        {
          std::shared_lock lock(engine_mu_);
          check_delayed(engine_, command);
        }
        last_seq = enqueue(std::move(command));
        return std::nullopt;
      }
      default: {
        wait_applied(last_seq);
        std::shared_lock lock(engine_mu_);
        return answer(engine_, command);
      }
    }
  } catch (const std::exception& e) {
    return error_reply(e.what());
  }
}

void Server::serve_connection(Connection& conn) {
  std::string buffer;
  std::string replies;
  std::uint64_t last_seq = 0;
  char chunk[1 << 14];
  for (;;) {
    const ssize_t n = ::recv(conn.fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      if (auto reply = handle(std::string_view(buffer).substr(start, nl - start), last_seq)) {
        replies += *reply;
        replies += '\n';
      }
    }
    buffer.erase(0, start);
    if (buffer.size() > kMaxLine) {
      replies += error_reply("line too long") + "\n";
      send_all(conn.fd, replies);
      break;
    }
    if (!replies.empty()) {
      if (!send_all(conn.fd, replies)) break;
      replies.clear();
    }
  }
  ::shutdown(conn.fd, SHUT_RDWR);
  conn.done = true;
}

void Server::accept_loop() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(kPollSlice.count()));
    reap_connections(false);
    if (ready <= 0 || stopping_) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_unique<Connection>();
    conn->fd = fd;
    Connection& ref = *conn;
    std::lock_guard lock(conn_mu_);
    connections_.push_back(std::move(conn));
    ref.thread = std::thread([this, &ref] { serve_connection(ref); });
  }
}

void Server::reap_connections(bool all) {
  std::lock_guard lock(conn_mu_);
  for (auto it = connections_.begin(); it != connections_.end();) {
    Connection& c = **it;
    if (all && !c.done) ::shutdown(c.fd, SHUT_RDWR);
    if (all || c.done) {
      if (c.thread.joinable()) c.thread.join();
      ::close(c.fd);
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::clock_loop() {
  Epoch scheduled;
  std::uint64_t origin;
  {
    std::shared_lock lock(engine_mu_);
    scheduled = engine_.epoch();
    origin = engine_.origin();
  }
  std::unique_lock lock(clock_mu_);
  while (!stopping_) {
    const auto interval = static_cast<std::uint64_t>(std::floor(now() / options_.epoch_seconds));
    // Interval origin + t is open, so every interval boundary passed closes one epoch.
    while (origin + scheduled < interval) {
      Command tick;
      tick.kind = CommandKind::kTick;
      enqueue(std::move(tick));
      ++scheduled;
    }
    clock_cv_.wait_for(lock, kPollSlice, [&] { return stopping_.load(); });
  }
}

LineClient::LineClient(const std::string& host, std::uint16_t port) {
  const in_addr addr = resolve(host);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) io_error("socket");
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr = addr;
  sa.sin_port = htons(port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    io_error("cannot connect to " + host + ":" + std::to_string(port));
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

void LineClient::send_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  if (!send_all(fd_, data)) io_error("send");
}

std::string LineClient::read_line() {
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::kIo, "server closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace epochsketch
