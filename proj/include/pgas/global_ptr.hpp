#ifndef PGAS_GLOBAL_PTR_HPP
#define PGAS_GLOBAL_PTR_HPP

#include <array>
#include <cstdint>
#include <type_traits>

#include "pgas/types.hpp"

namespace pgas {

/// 16-byte global address: unit:32 | segment:16 | flags:16 | offset:64.
/// Addresses any 64-bit location on up to 2^32 units. Arithmetic acts on the
/// offset only; the unit and segment never change and there is no phase
/// information, so iterating a distributed range needs a GlobalIterator.
template <typename T>
struct GlobalPointer {
  static_assert(std::is_trivially_copyable_v<T>,
                "global memory holds trivially copyable elements only");

  std::uint32_t unit = 0;
  std::uint16_t segment = 0;
  std::uint16_t flags = 0;  // reserved, must be zero
  std::uint64_t offset = 0;  // bytes from the segment base

  friend constexpr bool operator==(const GlobalPointer&, const GlobalPointer&) = default;

  constexpr GlobalPointer& operator+=(std::int64_t elems) {
    offset = static_cast<std::uint64_t>(static_cast<std::int64_t>(offset) +
                                        elems * static_cast<std::int64_t>(sizeof(T)));
    return *this;
  }
  constexpr GlobalPointer& operator-=(std::int64_t elems) { return *this += -elems; }

  friend constexpr GlobalPointer operator+(GlobalPointer p, std::int64_t elems) {
    p += elems;
    return p;
  }
  friend constexpr GlobalPointer operator-(GlobalPointer p, std::int64_t elems) {
    p -= elems;
    return p;
  }
  /// Element distance between two pointers into the same unit and segment.
  friend constexpr std::int64_t operator-(const GlobalPointer& a, const GlobalPointer& b) {
    return (static_cast<std::int64_t>(a.offset) - static_cast<std::int64_t>(b.offset)) /
           static_cast<std::int64_t>(sizeof(T));
  }

  /// Little-endian 16-byte serialization (traces, debug dumps).
  std::array<std::byte, 16> to_bytes() const {
    std::array<std::byte, 16> out{};
    auto le = [&](std::size_t at, std::uint64_t v, int n) {
      for (int i = 0; i < n; ++i) out[at + i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
    };
    le(0, unit, 4);
    le(4, segment, 2);
    le(6, flags, 2);
    le(8, offset, 8);
    return out;
  }

  static GlobalPointer from_bytes(const std::array<std::byte, 16>& in) {
    auto le = [&](std::size_t at, int n) {
      std::uint64_t v = 0;
      for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
      return v;
    };
    GlobalPointer p;
    p.unit = static_cast<std::uint32_t>(le(0, 4));
    p.segment = static_cast<std::uint16_t>(le(4, 2));
    p.flags = static_cast<std::uint16_t>(le(6, 2));
    p.offset = le(8, 8);
    return p;
  }
};

static_assert(sizeof(GlobalPointer<int>) == 16);
static_assert(sizeof(GlobalPointer<double>) == 16);

}  // namespace pgas

#endif  // PGAS_GLOBAL_PTR_HPP
