#include "vbqc/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace vbqc {

Endpoint Endpoint::parse(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
    throw std::invalid_argument("endpoint must be HOST:PORT, got '" + s + "'");
  Endpoint e;
  e.host = s.substr(0, colon);
  std::size_t used = 0;
  try {
    e.port = std::stoi(s.substr(colon + 1), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() - colon - 1 || e.port < 0 || e.port > 65535)
    throw std::invalid_argument("bad port in endpoint '" + s + "'");
  return e;
}

LineSocket::~LineSocket() {
  if (fd_ >= 0) ::close(fd_);
}

bool LineSocket::send_line(const std::string& line) {
  std::string out = line + "\n";
  std::size_t done = 0;
  while (done < out.size()) {
    ssize_t n = ::send(fd_, out.data() + done, out.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> LineSocket::recv_line(int timeout_ms) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    auto nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) throw SessionAbort("no message within " + std::to_string(timeout_ms) + " ms");
    pollfd p{fd_, POLLIN, 0};
    int r = ::poll(&p, 1, static_cast<int>(left));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw SessionAbort(std::string("poll: ") + std::strerror(errno));
    if (r == 0) continue;
    char chunk[4096];
    ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::nullopt;
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

int connect_once(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0)
    throw SessionAbort("cannot resolve " + ep.str());
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd >= 0) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  return fd;
}

int listen_on(Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0)
    throw std::runtime_error("cannot resolve " + ep.str());
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 4) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw std::runtime_error("cannot listen on " + ep.str() + ": " + std::strerror(errno));
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) ep.port = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  if (addr.ss_family == AF_INET6) ep.port = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  return fd;
}

class ServerLog {
 public:
  explicit ServerLog(const std::string& path) {
    if (!path.empty()) {
      out_.open(path, std::ios::app);
      if (!out_) throw std::runtime_error("cannot open server log " + path);
    }
  }
  void msg(bool inbound, const WireMessage& m) { line(std::string(inbound ? "in " : "out ") + serialize(m)); }
  void note(const std::string& s) { line("# " + s); }

 private:
  void line(const std::string& s) {
    if (out_.is_open()) out_ << s << '\n' << std::flush;
  }
  std::ofstream out_;
};

// One connection.  Returns true when the session reached the result exchange.
bool run_server_session(LineSocket& sock, const PublicParams& params, const ServeOptions& opt, ServerLog& log) {
  ServerRole role(params);
  std::size_t logged = 0;
  auto flush_role_log = [&] {
    for (; logged < role.log().size(); ++logged) log.msg(role.log()[logged].inbound, role.log()[logged].msg);
  };
  auto abort_round = [&](const std::string& why) {
    std::int64_t round = role.in_round() ? role.current_round() : role.completed_rounds();
    log.note(why);
    WireMessage a = make_abort(round);
    log.msg(false, a);
    sock.send_line(serialize(a));
    role.reset_round();
  };

  for (;;) {
    std::optional<std::string> line;
    try {
      line = sock.recv_line(opt.recv_timeout_ms);
    } catch (const SessionAbort& e) {
      abort_round(std::string("timeout: ") + e.what());
      return false;
    }
    if (!line) {
      if (role.in_round())
        abort_round("client disconnected in round " + std::to_string(role.current_round()));
      else
        log.note("client disconnected");
      return false;
    }
    WireMessage m;
    try {
      m = parse_wire(*line);
    } catch (const std::invalid_argument& e) {
      abort_round(e.what());
      return false;
    }
    auto replies = role.on_message(m);
    flush_role_log();
    for (const auto& r : replies)
      if (!sock.send_line(serialize(r))) {
        log.note("client gone while replying");
        role.reset_round();
        return false;
      }
    if (role.finished()) return true;
  }
}

}  // namespace

TcpClientChannel::TcpClientChannel(const Endpoint& ep, int recv_timeout_ms, int connect_ms) : timeout_ms_(recv_timeout_ms) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(connect_ms);
  for (;;) {
    int fd = connect_once(ep);
    if (fd >= 0) {
      sock_.emplace(fd);
      return;
    }
    if (std::chrono::steady_clock::now() >= deadline) throw SessionAbort("cannot connect to " + ep.str());
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

void TcpClientChannel::send(const WireMessage& m) {
  if (!sock_->send_line(serialize(m))) throw SessionAbort("server closed the connection");
}

WireMessage TcpClientChannel::recv() {
  auto line = sock_->recv_line(timeout_ms_);
  if (!line) throw SessionAbort("server closed the connection");
  try {
    return parse_wire(*line);
  } catch (const std::invalid_argument& e) {
    throw SessionAbort(std::string("malformed reply: ") + e.what());
  }
}

ServeSummary serve(const PublicParams& params, const ServeOptions& opt) {
  Endpoint ep = opt.endpoint;
  int lfd = listen_on(ep);
  ServerLog log(opt.log_path);
  log.note("listening on " + ep.str());
  if (opt.on_listen) opt.on_listen(ep);
  ServeSummary sum;
  while (opt.sessions == 0 || sum.sessions < opt.sessions) {
    int fd = ::accept(lfd, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      ::close(lfd);
      throw std::runtime_error(std::string("accept: ") + std::strerror(errno));
    }
    LineSocket sock(fd);
    ++sum.sessions;
    log.note("session " + std::to_string(sum.sessions) + " opened");
    bool ok = run_server_session(sock, params, opt, log);
    sum.completed += ok;
    log.note("session " + std::to_string(sum.sessions) + (ok ? " completed" : " aborted"));
  }
  ::close(lfd);
  return sum;
}

}  // namespace vbqc
