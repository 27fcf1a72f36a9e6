#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ranslice/controller/controller.hpp"

namespace httplib {
class Server;
}

namespace ranslice::controller {

struct ServeOptions {
  std::string bind = "127.0.0.1";
  /// Southbound agent port; 0 picks a free one.
  std::uint16_t agent_port = 4433;
  /// REST port; 0 picks a free one.
  std::uint16_t rest_port = 8080;
  std::string token;
  ControllerConfig config;
  std::vector<EnbId> enbs;
};

/// Standalone controller on real sockets: one thread owns the controller and
/// its agent connections (length-prefixed frames over TCP), the HTTP server
/// hands REST requests to that thread and waits for the answer.
class Server {
 public:
  explicit Server(ServeOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds both ports and starts serving; throws std::runtime_error on
  /// bind failure.
  void start();
  void stop();
  /// Blocks until stop().
  void wait();

  std::uint16_t agent_port() const { return agent_port_; }
  std::uint16_t rest_port() const { return rest_port_; }

  /// Runs `fn` on the controller thread and returns its result.
  template <typename F>
  auto call(F fn) -> decltype(fn(std::declval<Controller&>())) {
    using R = decltype(fn(std::declval<Controller&>()));
    auto task = std::make_shared<std::packaged_task<R()>>([this, fn]() mutable { return fn(*controller_); });
    auto fut = task->get_future();
    post([task] { (*task)(); });
    return fut.get();
  }

 private:
  class Host;
  struct Timer {
    Millis at;
    std::function<void()> fn;
  };

  void post(std::function<void()> fn);
  void loop();
  void wake();

  ServeOptions options_;
  std::unique_ptr<Host> host_;
  std::unique_ptr<Controller> controller_;
  std::unique_ptr<httplib::Server> http_;
  int listen_fd_ = -1;
  int wake_r_ = -1;
  int wake_w_ = -1;
  std::uint16_t agent_port_ = 0;
  std::uint16_t rest_port_ = 0;
  std::map<ConnId, int> fds_;
  ConnId next_conn_ = 1;
  std::map<std::uint64_t, Timer> timers_;
  std::uint64_t next_timer_ = 1;
  std::mutex mu_;
  std::vector<std::function<void()>> tasks_;
  std::atomic<bool> stopping_{false};
  std::thread loop_thread_;
  std::thread http_thread_;
};

}  // namespace ranslice::controller
