#ifndef PGAS_NET_HPP
#define PGAS_NET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgas/types.hpp"

namespace pgas::net {

/// RAII TCP socket with whole-buffer read/write helpers.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  void write_all(ConstByteSpan data);
  /// Reads exactly data.size() bytes; throws transport_error on EOF/error.
  void read_all(ByteSpan data);
  /// Like read_all, but a clean EOF before the first byte returns false.
  bool read_all_or_eof(ByteSpan data);

  void set_nodelay();
  void set_recv_timeout_ms(std::uint32_t ms);

 private:
  int fd_ = -1;
};

class Listener {
 public:
  Listener() = default;
  /// Binds the host (port 0 = ephemeral) and listens.
  static Listener open(const std::string& host = "127.0.0.1", std::uint16_t port = 0);

  Socket accept();
  int fd() const { return sock_.fd(); }
  /// "host:port" peers can connect to.
  const std::string& address() const { return address_; }
  void close() { sock_.close(); }

 private:
  Socket sock_;
  std::string address_;
};

/// Connects to "host:port" with a timeout; throws startup_error on failure.
Socket connect_to(const std::string& host_port, std::uint32_t timeout_ms);

// --- Wire protocol -------------------------------------------------------
//
// Length-prefixed frames, little-endian:
//   u32 frame_length | u8 opcode | u16 seg | u32 unit | u64 offset |
//   u32 len | payload
// frame_length counts everything after the prefix. For BARRIER/CTRL frames
// the payload starts with the 16-byte control tag.

enum class Opcode : std::uint8_t {
  Put = 1,
  Get = 2,
  GetReply = 3,
  Flush = 4,
  FlushAck = 5,
  Barrier = 6,
  Ctrl = 7,
};

inline constexpr std::size_t kFrameHeaderBytes = 19;
inline constexpr std::uint64_t kReplyError = ~std::uint64_t{0};
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 30;

struct Frame {
  Opcode op = Opcode::Ctrl;
  std::uint16_t seg = 0;
  std::uint32_t unit = 0;
  std::uint64_t offset = 0;
  std::uint32_t len = 0;
  std::vector<std::byte> payload;
};

void store_le16(std::byte* p, std::uint16_t v);
void store_le32(std::byte* p, std::uint32_t v);
void store_le64(std::byte* p, std::uint64_t v);
std::uint16_t load_le16(const std::byte* p);
std::uint32_t load_le32(const std::byte* p);
std::uint64_t load_le64(const std::byte* p);

/// Writes header and payload; `extra` is appended after payload without
/// copying into a staging buffer (used for put data).
void write_frame(Socket& s, const Frame& header_and_payload, ConstByteSpan extra = {});
/// Reads one frame; nullopt on clean EOF at a frame boundary.
std::optional<Frame> read_frame(Socket& s);

}  // namespace pgas::net

#endif  // PGAS_NET_HPP
