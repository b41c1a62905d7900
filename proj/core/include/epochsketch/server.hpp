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

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>

#include "epochsketch/engine.hpp"
#include "epochsketch/protocol.hpp"

namespace epochsketch {

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7070;  // 0 picks a free port
  bool live = false;
  double epoch_seconds = 300.0;
  /// Seconds since the Unix epoch; defaults to the system clock.
  std::function<double()> now;

  static ServerOptions from_config(const EngineConfig& config);
};

/// Line-protocol TCP server. Connection threads only enqueue mutations, a
/// single writer thread applies them in arrival order, and queries read the
/// engine under a shared lock once the connection's own earlier mutations
/// have been applied. In live mode a clock thread closes epochs on
/// wall-clock multiples of epoch_seconds.
class Server {
 public:
  Server(Engine& engine, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts all threads. Throws kIo if the address is unusable.
  void start();
  /// Stops accepting, drops connections, applies queued mutations, joins.
  void stop();
  bool running() const { return running_; }
  std::uint16_t port() const { return port_; }

  /// Waits until every mutation enqueued so far has been applied.
  void flush();

  /// Runs `fn` with shared access to the engine.
  void read(const std::function<void(const Engine&)>& fn) const;

 private:
  struct Connection {
    int fd = -1;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  std::uint64_t enqueue(Command command);
  void wait_applied(std::uint64_t seq);
  std::optional<std::string> handle(std::string_view line, std::uint64_t& last_seq);

  void accept_loop();
  void serve_connection(Connection& conn);
  void writer_loop();
  void clock_loop();
  void reap_connections(bool all);
  double now() const;

  Engine& engine_;
  ServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};

  mutable std::shared_mutex engine_mu_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::pair<std::uint64_t, Command>> queue_;
  std::uint64_t next_seq_ = 0;
  bool writer_stop_ = false;

  std::mutex applied_mu_;
  std::condition_variable applied_cv_;
  std::uint64_t applied_seq_ = 0;

  std::mutex conn_mu_;
  std::list<std::unique_ptr<Connection>> connections_;

  std::mutex clock_mu_;
  std::condition_variable clock_cv_;

  std::thread acceptor_;
  std::thread writer_;
  std::thread clock_;
};

/// Minimal blocking client used by the CLI and tests.
class LineClient {
 public:
  LineClient(const std::string& host, std::uint16_t port);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send_line(std::string_view line);
  /// Blocks for one reply line; throws kIo when the server hangs up.
  std::string read_line();

 private:
  int fd_ = -1;
  std::string buffer_;
};

/// Splits "host:port"; throws kConfig when malformed.
std::pair<std::string, std::uint16_t> split_address(std::string_view address);

}  // namespace epochsketch
