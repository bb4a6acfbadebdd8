#include "devquad/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <list>
#include <mutex>
#include <thread>

#include "devquad/error.hpp"

namespace devquad {

using nlohmann::json;

namespace {

bool write_all(int fd, const std::string& bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<std::size_t>(n);
  }
  return true;
}

std::string frames_of(const Outgoing& out) {
  std::string bytes = encode_frame(out.message.dump());
  if (out.message.contains("binary") || (out.message.contains("snapshot") && out.message["snapshot"].contains("binary")))
    bytes += encode_frame(out.binary);
  return bytes;
}

void run_connection(int fd, SessionOptions options, const std::atomic<bool>& stop) {
  std::mutex write_mutex;
  bool open = true;
  auto sink = [&](const Outgoing& out) {
    std::lock_guard lock(write_mutex);
    if (open && !write_all(fd, frames_of(out))) open = false;
  };
  {
    Session session("s" + std::to_string(fd), sink, options);
    FrameDecoder decoder;
    char buf[65536];
    while (!stop.load()) {
      pollfd p{fd, POLLIN, 0};
      const int ready = ::poll(&p, 1, 100);
      if (ready < 0 && errno != EINTR) break;
      if (ready <= 0) continue;
      const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
      if (n <= 0) break;
      try {
        decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
        while (auto frame = decoder.next()) {
          json msg = json::parse(*frame, nullptr, false);
          if (msg.is_discarded()) {
            json err = error_reply("MalformedMessage", "payload is not JSON");
            sink({err, {}});
            continue;
          }
          session.handle_message(msg);
        }
      } catch (const Error& e) {
        sink({error_reply(to_string(e.code()), e.what()), {}});
        break;
      }
    }
  }
  ::close(fd);
}

}  // namespace

void serve(const ServerOptions& options, const std::atomic<bool>& stop,
           const std::function<void(std::uint16_t)>& on_listening) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options.port);
  if (::inet_pton(AF_INET, options.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listener);
    throw Error(ErrorCode::Io, "bad host " + options.host);
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listener, 16) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listener);
    throw Error(ErrorCode::Io, "bind/listen: " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listening) on_listening(ntohs(addr.sin_port));

  std::list<std::thread> connections;
  while (!stop.load()) {
    pollfd p{listener, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    connections.emplace_back(run_connection, fd, options.session, std::cref(stop));
  }
  ::close(listener);
  for (auto& t : connections) t.join();
}

WireClient::WireClient(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  ::inet_pton(AF_INET, host.c_str(), &addr.sin_addr);
  if (fd_ < 0 || ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    if (fd_ >= 0) ::close(fd_);
    throw Error(ErrorCode::Io, "cannot connect to " + host + ":" + std::to_string(port));
  }
}

WireClient::~WireClient() {
  if (fd_ >= 0) ::close(fd_);
}

void WireClient::send(const json& message) {
  if (!write_all(fd_, encode_frame(message.dump()))) throw Error(ErrorCode::Io, "send failed");
}

std::optional<std::string> WireClient::read_frame(int timeout_ms) {
  char buf[65536];
  while (true) {
    if (auto frame = decoder_.next()) return frame;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, timeout_ms) <= 0) return std::nullopt;
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) return std::nullopt;
    decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

std::optional<Outgoing> WireClient::receive(int timeout_ms) {
  auto frame = read_frame(timeout_ms);
  if (!frame) return std::nullopt;
  Outgoing out;
  out.message = json::parse(*frame);
  const bool has_binary = out.message.contains("binary") ||
                          (out.message.contains("snapshot") && out.message["snapshot"].contains("binary"));
  if (has_binary) {
    auto data = read_frame(timeout_ms);
    if (!data) return std::nullopt;
    out.binary = std::move(*data);
  }
  return out;
}

}  // namespace devquad
