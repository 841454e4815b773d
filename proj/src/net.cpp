#include "pgas/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace pgas::net {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw transport_error(what + ": " + std::strerror(errno));
}

sockaddr_in parse_addr(const std::string& host_port) {
  auto colon = host_port.rfind(':');
  if (colon == std::string::npos)
    throw startup_error("address '" + host_port + "' is not host:port");
  std::string host = host_port.substr(0, colon);
  int port = std::atoi(host_port.c_str() + colon + 1);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (host == "localhost") host = "127.0.0.1";
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw startup_error("cannot parse host '" + host + "'");
  return addr;
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::write_all(ConstByteSpan data) {
  const std::byte* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    ssize_t n = ::send(fd_, p, left, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket write");
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

void Socket::read_all(ByteSpan data) {
  if (!read_all_or_eof(data)) throw transport_error("socket closed while reading");
}

bool Socket::read_all_or_eof(ByteSpan data) {
  std::byte* p = data.data();
  std::size_t left = data.size();
  bool first = true;
  while (left > 0) {
    ssize_t n = ::recv(fd_, p, left, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket read");
    }
    if (n == 0) {
      if (first) return false;
      throw transport_error("socket closed mid-message");
    }
    first = false;
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  return true;
}

void Socket::set_nodelay() {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void Socket::set_recv_timeout_ms(std::uint32_t ms) {
  timeval tv{};
  tv.tv_sec = ms / 1000;
  tv.tv_usec = static_cast<long>(ms % 1000) * 1000;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

Listener Listener::open(const std::string& host, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  Socket sock(fd);
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = parse_addr(host + ":" + std::to_string(port));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) throw_errno("bind");
  if (::listen(fd, 128) < 0) throw_errno("listen");
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  char buf[INET_ADDRSTRLEN];
  inet_ntop(AF_INET, &bound.sin_addr, buf, sizeof(buf));
  Listener l;
  l.sock_ = std::move(sock);
  l.address_ = std::string(buf) + ":" + std::to_string(ntohs(bound.sin_port));
  return l;
}

Socket Listener::accept() {
  while (true) {
    int fd = ::accept(sock_.fd(), nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      throw_errno("accept");
    }
    Socket s(fd);
    s.set_nodelay();
    return s;
  }
}

Socket connect_to(const std::string& host_port, std::uint32_t timeout_ms) {
  sockaddr_in addr = parse_addr(host_port);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  Socket sock(fd);

  int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  if (rc < 0 && errno != EINPROGRESS)
    throw startup_error("cannot connect to " + host_port + ": " + std::strerror(errno));
  if (rc < 0) {
    pollfd pfd{fd, POLLOUT, 0};
    int pr = ::poll(&pfd, 1, static_cast<int>(timeout_ms));
    if (pr == 0) throw startup_error("connect to " + host_port + " timed out");
    if (pr < 0) throw_errno("poll");
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0)
      throw startup_error("cannot connect to " + host_port + ": " + std::strerror(err));
  }
  ::fcntl(fd, F_SETFL, flags);
  sock.set_nodelay();
  return sock;
}

void store_le16(std::byte* p, std::uint16_t v) {
  p[0] = static_cast<std::byte>(v & 0xff);
  p[1] = static_cast<std::byte>(v >> 8);
}

void store_le32(std::byte* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

void store_le64(std::byte* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

std::uint16_t load_le16(const std::byte* p) {
  return static_cast<std::uint16_t>(static_cast<std::uint16_t>(p[0]) |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

std::uint32_t load_le32(const std::byte* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t load_le64(const std::byte* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void write_frame(Socket& s, const Frame& f, ConstByteSpan extra) {
  const std::size_t body = f.payload.size() + extra.size();
  if (body + kFrameHeaderBytes > kMaxFrameBytes) throw transport_error("frame too large");
  std::byte header[4 + kFrameHeaderBytes];
  store_le32(header, static_cast<std::uint32_t>(kFrameHeaderBytes + body));
  header[4] = static_cast<std::byte>(f.op);
  store_le16(header + 5, f.seg);
  store_le32(header + 7, f.unit);
  store_le64(header + 11, f.offset);
  store_le32(header + 19, f.len);
  if (f.payload.empty() && extra.empty()) {
    s.write_all({header, sizeof(header)});
    return;
  }
  // Assemble small frames into one write; stream large payloads separately.
  if (body <= 4096) {
    std::vector<std::byte> buf(sizeof(header) + body);
    std::memcpy(buf.data(), header, sizeof(header));
    if (!f.payload.empty())
      std::memcpy(buf.data() + sizeof(header), f.payload.data(), f.payload.size());
    if (!extra.empty())
      std::memcpy(buf.data() + sizeof(header) + f.payload.size(), extra.data(), extra.size());
    s.write_all(buf);
  } else {
    s.write_all({header, sizeof(header)});
    if (!f.payload.empty()) s.write_all(f.payload);
    if (!extra.empty()) s.write_all(extra);
  }
}

std::optional<Frame> read_frame(Socket& s) {
  std::byte lenbuf[4];
  if (!s.read_all_or_eof({lenbuf, 4})) return std::nullopt;
  std::uint32_t frame_len = load_le32(lenbuf);
  if (frame_len < kFrameHeaderBytes || frame_len > kMaxFrameBytes)
    throw transport_error("invalid frame length " + std::to_string(frame_len));
  std::byte header[kFrameHeaderBytes];
  s.read_all({header, kFrameHeaderBytes});
  Frame f;
  f.op = static_cast<Opcode>(header[0]);
  f.seg = load_le16(header + 1);
  f.unit = load_le32(header + 3);
  f.offset = load_le64(header + 7);
  f.len = load_le32(header + 15);
  f.payload.resize(frame_len - kFrameHeaderBytes);
  if (!f.payload.empty()) s.read_all(f.payload);
  return f;
}

}  // namespace pgas::net
