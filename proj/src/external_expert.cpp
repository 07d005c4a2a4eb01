#include "wme/external_expert.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <mutex>
#include <thread>

#include "wme/error.hpp"
#include "wme/io.hpp"
#include "wme/protocol.hpp"

namespace wme {

using Clock = std::chrono::steady_clock;

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

int millis_until(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

}  // namespace

ExternalDescriptor ExternalDescriptor::parse(std::string_view text) {
  ExternalDescriptor d;
  if (text.starts_with("cmd:")) {
    d.transport = Transport::kStdio;
    d.command = std::string(text.substr(4));
    if (io::trim(d.command).empty()) throw ConfigError("empty expert command");
    return d;
  }
  if (text.starts_with("tcp:")) {
    auto rest = text.substr(4);
    auto colon = rest.rfind(':');
    std::int64_t port = 0;
    if (colon == std::string_view::npos || colon == 0 || !io::parse_int(rest.substr(colon + 1), port) || port <= 0 ||
        port > 65535)
      throw ConfigError("bad tcp expert descriptor \"" + std::string(text) + "\"");
    d.transport = Transport::kTcp;
    d.host = std::string(rest.substr(0, colon));
    d.port = static_cast<int>(port);
    return d;
  }
  throw ConfigError("external expert descriptor must start with cmd: or tcp:");
}

std::string ExternalDescriptor::to_string() const {
  return transport == Transport::kStdio ? "cmd:" + command : "tcp:" + host + ":" + std::to_string(port);
}

class ExternalExpert::Channel {
 public:
  enum class Status { kLine, kTimeout, kClosed };

  static std::unique_ptr<Channel> spawn(const std::string& command) {
    ignore_sigpipe();
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error(std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
    auto ch = std::unique_ptr<Channel>(new Channel(from_child[0], to_child[1], pid));
    return ch;
  }

  static std::unique_ptr<Channel> dial(const std::string& host, int port) {
    ignore_sigpipe();
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res); rc != 0)
      throw ProtocolError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    int fd = -1;
    for (auto* ai = res; ai; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw ProtocolError("cannot connect to " + host + ":" + std::to_string(port));
    return std::unique_ptr<Channel>(new Channel(fd, fd, -1));
  }

  ~Channel() { close(); }

  void queue(std::string_view line) {
    out_.append(line);
    out_.push_back('\n');
  }

  /// Flushes queued output and waits for the next complete input line.
  Status pump(std::string& line, Clock::time_point deadline) {
    while (true) {
      if (auto nl = in_.find('\n'); nl != std::string::npos) {
        line = in_.substr(0, nl);
        in_.erase(0, nl + 1);
        return Status::kLine;
      }
      if (closed_ || eof_) return Status::kClosed;
      pollfd fds[2] = {{in_fd_, POLLIN, 0}, {out_fd_, POLLOUT, 0}};
      const nfds_t count = (!out_.empty() && out_fd_ != in_fd_) ? 2 : 1;
      if (!out_.empty() && out_fd_ == in_fd_) fds[0].events |= POLLOUT;
      const int rc = ::poll(fds, count, millis_until(deadline));
      if (rc < 0) {
        if (errno == EINTR) continue;
        closed_ = true;
        return Status::kClosed;
      }
      if (rc == 0) return Status::kTimeout;
      const bool writable = (count == 2 ? fds[1].revents : fds[0].revents) & (POLLOUT | POLLERR | POLLHUP);
      if (!out_.empty() && writable && !write_some()) return Status::kClosed;
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[4096];
        const ssize_t got = ::read(in_fd_, buf, sizeof buf);
        if (got > 0) {
          in_.append(buf, static_cast<std::size_t>(got));
        } else if (got == 0 || (errno != EAGAIN && errno != EINTR)) {
          eof_ = true;
        }
      }
      if (Clock::now() >= deadline && in_.find('\n') == std::string::npos) return Status::kTimeout;
    }
  }

  /// Best-effort drain of queued output.
  void flush(Clock::time_point deadline) {
    while (!out_.empty() && !closed_) {
      pollfd fd{out_fd_, POLLOUT, 0};
      if (::poll(&fd, 1, millis_until(deadline)) <= 0) return;
      if (!write_some()) return;
    }
  }

  void close() {
    if (out_fd_ >= 0 && out_fd_ != in_fd_) ::close(out_fd_);
    if (in_fd_ >= 0) ::close(in_fd_);
    in_fd_ = out_fd_ = -1;
    closed_ = true;
    if (pid_ > 0) {
      const auto give_up = Clock::now() + std::chrono::milliseconds(300);
      int status = 0;
      while (::waitpid(pid_, &status, WNOHANG) == 0) {
        if (Clock::now() >= give_up) {
          ::kill(pid_, SIGKILL);
          ::waitpid(pid_, &status, 0);
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      pid_ = -1;
    }
  }

 private:
  Channel(int in_fd, int out_fd, pid_t pid) : in_fd_(in_fd), out_fd_(out_fd), pid_(pid) {
    set_nonblocking(in_fd_);
    if (out_fd_ != in_fd_) set_nonblocking(out_fd_);
  }

  bool write_some() {
    const ssize_t n = in_fd_ == out_fd_ ? ::send(out_fd_, out_.data(), out_.size(), MSG_NOSIGNAL)
                                        : ::write(out_fd_, out_.data(), out_.size());
    if (n > 0) {
      out_.erase(0, static_cast<std::size_t>(n));
      return true;
    }
    if (n < 0 && (errno == EAGAIN || errno == EINTR)) return true;
    closed_ = true;
    return false;
  }

  int in_fd_;
  int out_fd_;
  pid_t pid_;
  std::string in_;
  std::string out_;
  bool eof_ = false;
  bool closed_ = false;
};

ExternalExpert::ExternalExpert(std::unique_ptr<Channel> channel, ExternalOptions options)
    : channel_(std::move(channel)), options_(options) {}

ExternalExpert::~ExternalExpert() { shutdown(); }

std::unique_ptr<ExternalExpert> ExternalExpert::connect(const ExternalDescriptor& d, const ExternalOptions& options) {
  auto channel = d.transport == ExternalDescriptor::Transport::kStdio ? Channel::spawn(d.command)
                                                                       : Channel::dial(d.host, d.port);
  std::unique_ptr<ExternalExpert> expert(new ExternalExpert(std::move(channel), options));
  expert->channel_->queue(protocol::hello());
  const auto deadline = Clock::now() + options.handshake_timeout;
  std::string line;
  while (true) {
    const auto status = expert->channel_->pump(line, deadline);
    if (status == Channel::Status::kTimeout)
      throw ProtocolError("handshake with " + d.to_string() + " timed out");
    if (status == Channel::Status::kClosed)
      throw ProtocolError("handshake with " + d.to_string() + " failed: transport closed");
    auto reply = protocol::parse_reply(line);
    if (auto* ready = std::get_if<protocol::Ready>(&reply)) {
      expert->name_ = ready->name;
      return expert;
    }
    if (auto* bad = std::get_if<protocol::Malformed>(&reply))
      throw ProtocolError("handshake with " + d.to_string() + " failed: " + bad->reason);
  }
}

void ExternalExpert::log(std::string message) {
  std::cerr << "[expert " << name_ << "] " << message << '\n';
  events_.push_back(std::move(message));
}

void ExternalExpert::fail(const std::string& why) {
  if (failed_) return;
  failed_ = true;
  log("failed: " + why + "; abstaining for the remaining rounds");
}

std::vector<Prediction> ExternalExpert::predict_round(const RoundQuery& query) {
  const std::size_t m = query.tickers.size();
  std::vector<Prediction> out(m, Prediction{ClassLabel(kNeutralClass), true, {}});
  if (failed_ || !channel_) {
    abstentions_ += m;
    return out;
  }
  const auto start = Clock::now();
  const auto deadline = start + options_.deadline;
  for (std::size_t t = 0; t < m; ++t)
    channel_->queue(protocol::features(query.round, query.tickers[t], query.features[t]));

  std::vector<bool> answered(m, false);
  std::size_t open = m;
  std::string line;
  while (open > 0) {
    const auto status = channel_->pump(line, deadline);
    if (status == Channel::Status::kTimeout) break;
    if (status == Channel::Status::kClosed) {
      fail("transport closed at round " + std::to_string(query.round));
      break;
    }
    auto reply = protocol::parse_reply(line);
    if (auto* bad = std::get_if<protocol::Malformed>(&reply)) {
      ++violations_;
      log("protocol violation at round " + std::to_string(query.round) + ": " + bad->reason);
      continue;
    }
    auto* p = std::get_if<protocol::PredictionReply>(&reply);
    if (!p || p->round != query.round) continue;
    std::size_t t = 0;
    while (t < m && query.tickers[t] != p->ticker) ++t;
    if (t == m || answered[t]) continue;
    answered[t] = true;
    --open;
    if (p->klass < 0 || p->klass >= kClassCount) {
      ++violations_;
      log("protocol violation at round " + std::to_string(query.round) + ": class " + std::to_string(p->klass) +
          " for " + p->ticker + " outside 0-4");
      continue;
    }
    out[t] = {ClassLabel(static_cast<int>(p->klass)), false,
              std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start)};
  }
  for (const auto& p : out) abstentions_ += p.abstained ? 1 : 0;
  return out;
}

void ExternalExpert::shutdown() {
  if (!channel_) return;
  if (!failed_) {
    channel_->queue(protocol::bye());
    channel_->flush(Clock::now() + std::chrono::milliseconds(100));
  }
  channel_->close();
  channel_.reset();
}

std::unique_ptr<ExternalExpert> host_external(std::string_view descriptor, const ExternalOptions& options) {
  return ExternalExpert::connect(ExternalDescriptor::parse(descriptor), options);
}

}  // namespace wme
