#include "ranslice/controller/serve.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <stdexcept>

#include "httplib.h"

#include "ranslice/controller/rest.hpp"

namespace ranslice::controller {

namespace {

Millis wall_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    auto k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      return;
    }
    data += k;
    n -= static_cast<std::size_t>(k);
  }
}

}  // namespace

class Server::Host : public ControllerHost {
 public:
  explicit Host(Server& s) : s_(s), epoch_(wall_ms()) {}
  Millis now() const override { return wall_ms() - epoch_; }
  void send(ConnId conn, std::vector<std::uint8_t> frame) override {
    auto it = s_.fds_.find(conn);
    if (it != s_.fds_.end()) write_all(it->second, frame.data(), frame.size());
  }
  void close(ConnId conn) override {
    auto it = s_.fds_.find(conn);
    if (it == s_.fds_.end()) return;
    ::close(it->second);
    s_.fds_.erase(it);
  }
  TimerId schedule(Millis delay, std::function<void()> fn) override {
    auto id = s_.next_timer_++;
    s_.timers_[id] = {now() + delay, std::move(fn)};
    return id;
  }
  void cancel(TimerId id) override { s_.timers_.erase(id); }

 private:
  Server& s_;
  Millis epoch_;
};

Server::Server(ServeOptions options) : options_(std::move(options)) {}

Server::~Server() {
  stop();
  // The controller cancels its timers on the way out; timers_ must still exist.
  controller_.reset();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  if (wake_r_ >= 0) ::close(wake_r_);
  if (wake_w_ >= 0) ::close(wake_w_);
  for (auto& [c, fd] : fds_) ::close(fd);
}

void Server::start() {
  int pipefd[2];
  if (::pipe(pipefd) != 0) throw std::runtime_error("pipe failed");
  wake_r_ = pipefd[0];
  wake_w_ = pipefd[1];
  ::fcntl(wake_r_, F_SETFL, O_NONBLOCK);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.agent_port);
  if (::inet_pton(AF_INET, options_.bind.c_str(), &addr.sin_addr) != 1)
    throw std::runtime_error("bad bind address " + options_.bind);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0)
    throw std::runtime_error("cannot listen on agent port " + std::to_string(options_.agent_port) + ": " +
                             std::strerror(errno));
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  agent_port_ = ntohs(addr.sin_port);

  host_ = std::make_unique<Host>(*this);
  controller_ = std::make_unique<Controller>(options_.config, *host_);
  for (auto id : options_.enbs) controller_->register_enb(id);

  http_ = std::make_unique<httplib::Server>();
  auto api = std::make_shared<RestApi>(*controller_, options_.token);
  auto handler = [this, api](const httplib::Request& req, httplib::Response& res) {
    RestRequest r;
    r.method = req.method;
    r.path = req.path;
    r.body = req.body;
    r.authorization = req.get_header_value("Authorization");
    for (const auto& [k, v] : req.params) r.query[k] = v;
    auto out = call([&](Controller&) { return api->handle(r); });
    res.status = out.status;
    res.set_content(out.body.dump(2) + "\n", "application/json");
  };
  http_->Get(".*", handler);
  http_->Post(".*", handler);
  http_->Put(".*", handler);
  http_->Delete(".*", handler);

  if (options_.rest_port == 0) {
    int port = http_->bind_to_any_port(options_.bind);
    if (port < 0) throw std::runtime_error("cannot bind REST port");
    rest_port_ = static_cast<std::uint16_t>(port);
  } else {
    if (!http_->bind_to_port(options_.bind, options_.rest_port))
      throw std::runtime_error("cannot bind REST port " + std::to_string(options_.rest_port));
    rest_port_ = options_.rest_port;
  }

  loop_thread_ = std::thread([this] { loop(); });
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  if (http_) http_->stop();
  wake();
  if (http_thread_.joinable()) http_thread_.join();
  if (loop_thread_.joinable()) loop_thread_.join();
}

void Server::wait() {
  if (http_thread_.joinable()) http_thread_.join();
  if (loop_thread_.joinable()) loop_thread_.join();
}

void Server::post(std::function<void()> fn) {
  {
    std::lock_guard lock(mu_);
    tasks_.push_back(std::move(fn));
  }
  wake();
}

void Server::wake() {
  if (wake_w_ < 0) return;
  std::uint8_t b = 1;
  [[maybe_unused]] auto n = ::write(wake_w_, &b, 1);
}

void Server::loop() {
  std::vector<std::uint8_t> buf(64 * 1024);
  while (!stopping_) {
    std::vector<pollfd> fds{{wake_r_, POLLIN, 0}, {listen_fd_, POLLIN, 0}};
    std::vector<ConnId> conns;
    for (const auto& [c, fd] : fds_) {
      fds.push_back({fd, POLLIN, 0});
      conns.push_back(c);
    }
    int timeout = 1000;
    auto now = host_->now();
    for (const auto& [id, t] : timers_) timeout = std::min<int>(timeout, static_cast<int>(std::max<Millis>(0, t.at - now)));
    ::poll(fds.data(), fds.size(), timeout);
    if (stopping_) break;

    if (fds[0].revents & POLLIN) {
      std::uint8_t drain[64];
      while (::read(wake_r_, drain, sizeof drain) > 0) {
      }
    }
    std::vector<std::function<void()>> tasks;
    {
      std::lock_guard lock(mu_);
      tasks.swap(tasks_);
    }
    for (auto& t : tasks) t();

    if (fds[1].revents & POLLIN) {
      int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd >= 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        auto conn = next_conn_++;
        fds_[conn] = fd;
        controller_->on_connect(conn);
      }
    }
    for (std::size_t i = 2; i < fds.size(); ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      auto conn = conns[i - 2];
      auto it = fds_.find(conn);
      if (it == fds_.end()) continue;
      auto n = ::recv(it->second, buf.data(), buf.size(), 0);
      if (n <= 0) {
        ::close(it->second);
        fds_.erase(it);
        controller_->on_disconnect(conn);
        continue;
      }
      controller_->on_bytes(conn, std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)));
    }

    now = host_->now();
    std::vector<std::uint64_t> due;
    for (const auto& [id, t] : timers_)
      if (t.at <= now) due.push_back(id);
    for (auto id : due) {
      auto it = timers_.find(id);
      if (it == timers_.end()) continue;
      auto fn = std::move(it->second.fn);
      timers_.erase(it);
      fn();
    }
  }
  // Pending REST calls must not hang once the loop is gone.
  std::vector<std::function<void()>> tasks;
  {
    std::lock_guard lock(mu_);
    tasks.swap(tasks_);
  }
  for (auto& t : tasks) t();
}

}  // namespace ranslice::controller
