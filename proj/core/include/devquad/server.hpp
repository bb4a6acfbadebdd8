#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>

#include "devquad/session.hpp"
#include "devquad/wire.hpp"

namespace devquad {

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0: any free port
  SessionOptions session;
};

// Serves sessions over TCP until `stop` becomes true. Every connection gets
// its own session; replies and events are written as frames on the same
// socket. `on_listening` receives the bound port. Throws Error{Io} if the
// socket cannot be bound.
void serve(const ServerOptions& options, const std::atomic<bool>& stop,
           const std::function<void(std::uint16_t)>& on_listening = {});

// Blocking client helpers for tests and scripts.
class WireClient {
 public:
  WireClient(const std::string& host, std::uint16_t port);
  ~WireClient();
  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  void send(const nlohmann::json& message);
  // Next message (with its binary frame when announced), or nullopt on
  // timeout or closed connection.
  std::optional<Outgoing> receive(int timeout_ms);

 private:
  std::optional<std::string> read_frame(int timeout_ms);
  int fd_ = -1;
  FrameDecoder decoder_;
};

}  // namespace devquad
