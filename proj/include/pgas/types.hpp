#ifndef PGAS_TYPES_HPP
#define PGAS_TYPES_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace pgas {

/// Zero-based id of one SPMD participant, dense within the team it is
/// relative to. Global ids are relative to the root team.
struct UnitId {
  std::uint32_t value = 0;

  constexpr UnitId() = default;
  constexpr explicit UnitId(std::uint32_t v) : value(v) {}

  friend constexpr bool operator==(UnitId a, UnitId b) { return a.value == b.value; }
  friend constexpr bool operator!=(UnitId a, UnitId b) { return a.value != b.value; }
  friend constexpr bool operator<(UnitId a, UnitId b) { return a.value < b.value; }
};

/// Identifier of one registered memory segment. Segment 0 is reserved for
/// runtime control and never handed out by allocations.
struct SegmentId {
  std::uint16_t value = 0;

  constexpr SegmentId() = default;
  constexpr explicit SegmentId(std::uint16_t v) : value(v) {}

  friend constexpr bool operator==(SegmentId a, SegmentId b) { return a.value == b.value; }
  friend constexpr bool operator!=(SegmentId a, SegmentId b) { return a.value != b.value; }
};

inline constexpr SegmentId kControlSegment{0};

class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition of the API was violated by the caller.
class usage_error : public error {
 public:
  explicit usage_error(const std::string& what) : error(what) {}
};

/// An address or index was outside the registered/valid range.
class range_error : public error {
 public:
  explicit range_error(const std::string& what) : error(what) {}
};

/// Startup (rendezvous, spawn) failed; the runtime never became usable.
class startup_error : public error {
 public:
  explicit startup_error(const std::string& what) : error(what) {}
};

/// Communication substrate failure (socket error, protocol violation).
class transport_error : public error {
 public:
  explicit transport_error(const std::string& what) : error(what) {}
};

/// Text input (pattern spec, locality file) could not be parsed.
class parse_error : public error {
 public:
  parse_error(const std::string& what, std::size_t position)
      : error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

using ByteSpan = std::span<std::byte>;
using ConstByteSpan = std::span<const std::byte>;

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a(ConstByteSpan bytes, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace pgas

#endif  // PGAS_TYPES_HPP
