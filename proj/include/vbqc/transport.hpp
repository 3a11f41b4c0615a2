#pragma once

#include <functional>
#include <optional>
#include <string>

#include "vbqc/session.hpp"

namespace vbqc {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;

  // "HOST:PORT"; throws std::invalid_argument.
  static Endpoint parse(const std::string& s);
  std::string str() const { return host + ":" + std::to_string(port); }
};

// Line-delimited JSON over a connected TCP socket.
class LineSocket {
 public:
  explicit LineSocket(int fd) : fd_(fd) {}
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;
  ~LineSocket();

  // False if the peer is gone.
  bool send_line(const std::string& line);
  // Empty on EOF.  Throws SessionAbort when nothing arrives within timeout_ms.
  std::optional<std::string> recv_line(int timeout_ms);

 private:
  int fd_;
  std::string buf_;
};

// Client end of a two-process session.  Retries the connection until
// connect_ms has passed, so the server may start slightly later.
class TcpClientChannel : public ClientChannel {
 public:
  TcpClientChannel(const Endpoint& ep, int recv_timeout_ms = 30000, int connect_ms = 5000);
  void send(const WireMessage& m) override;
  WireMessage recv() override;

 private:
  std::optional<LineSocket> sock_;
  int timeout_ms_;
};

struct ServeOptions {
  Endpoint endpoint;
  std::string log_path;        // empty: no log file
  int sessions = 1;            // 0 serves forever
  int recv_timeout_ms = 30000;
  std::function<void(const Endpoint&)> on_listen;  // called with the bound port
};

struct ServeSummary {
  int sessions = 0;
  int completed = 0;  // sessions that reached the result exchange
};

// Accepts one connection at a time and runs the server role on it.  A client
// that disconnects or stalls mid-round gets an abort, the round is reset and
// the session closed.  Malformed lines are answered with an abort.
ServeSummary serve(const PublicParams& params, const ServeOptions& opt);

}  // namespace vbqc
