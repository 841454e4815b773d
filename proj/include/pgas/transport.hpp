#ifndef PGAS_TRANSPORT_HPP
#define PGAS_TRANSPORT_HPP

#include <atomic>
#include <cstdint>
#include <vector>

#include "pgas/mailbox.hpp"
#include "pgas/types.hpp"

namespace pgas {

struct OpCounterSnapshot {
  std::uint64_t puts = 0;
  std::uint64_t gets = 0;
  std::uint64_t put_bytes = 0;
  std::uint64_t get_bytes = 0;
  std::uint64_t ctrl_messages = 0;

  std::uint64_t data_ops() const { return puts + gets; }
};

/// Per-unit counts of transport operations initiated by this unit.
class OpCounters {
 public:
  void add_put(std::uint64_t bytes) {
    puts_.fetch_add(1, std::memory_order_relaxed);
    put_bytes_.fetch_add(bytes, std::memory_order_relaxed);
  }
  void add_get(std::uint64_t bytes) {
    gets_.fetch_add(1, std::memory_order_relaxed);
    get_bytes_.fetch_add(bytes, std::memory_order_relaxed);
  }
  void add_ctrl() { ctrl_.fetch_add(1, std::memory_order_relaxed); }

  OpCounterSnapshot snapshot() const {
    return {puts_.load(std::memory_order_relaxed), gets_.load(std::memory_order_relaxed),
            put_bytes_.load(std::memory_order_relaxed),
            get_bytes_.load(std::memory_order_relaxed), ctrl_.load(std::memory_order_relaxed)};
  }

 private:
  std::atomic<std::uint64_t> puts_{0}, gets_{0}, put_bytes_{0}, get_bytes_{0}, ctrl_{0};
};

class Transport;

/// Single-owner handle for one outstanding put/get. wait() is idempotent;
/// destruction waits (swallowing errors — call wait() to observe them).
class Completion {
 public:
  Completion() = default;
  Completion(Transport* t, std::uint32_t peer, std::uint64_t seq)
      : transport_(t), peer_(peer), seq_(seq) {}

  Completion(Completion&& other) noexcept { *this = std::move(other); }
  Completion& operator=(Completion&& other) noexcept {
    if (this != &other) {
      finish(true);
      transport_ = other.transport_;
      peer_ = other.peer_;
      seq_ = other.seq_;
      other.transport_ = nullptr;
    }
    return *this;
  }
  Completion(const Completion&) = delete;
  Completion& operator=(const Completion&) = delete;

  ~Completion() { finish(true); }

  void wait() { finish(false); }
  bool done() const { return transport_ == nullptr; }

 private:
  void finish(bool nothrow);

  Transport* transport_ = nullptr;
  std::uint32_t peer_ = 0;
  std::uint64_t seq_ = 0;
};

/// One-sided communication substrate: put/get on registered segments plus a
/// two-sided control plane for the runtime's collectives. All operations are
/// called from the owning unit's application thread; a hidden service thread
/// (tcp backend) or direct shared-memory access (in-process backend) serves
/// remote requests, so targets need not participate.
class Transport {
 public:
  Transport(UnitId self, std::uint32_t n_units) : self_(self), n_units_(n_units) {}
  virtual ~Transport() = default;

  UnitId self() const { return self_; }
  std::uint32_t world_size() const { return n_units_; }

  virtual void register_segment(SegmentId id, ByteSpan local) = 0;
  virtual void unregister_segment(SegmentId id) = 0;

  virtual Completion put(UnitId target, SegmentId seg, std::uint64_t offset,
                         ConstByteSpan src) = 0;
  virtual Completion get(UnitId source, SegmentId seg, std::uint64_t offset, ByteSpan dst) = 0;
  /// Makes all prior puts by this unit to `target` remotely visible.
  virtual void flush(UnitId target) = 0;
  virtual void flush_all() = 0;

  virtual void send_ctrl(UnitId to, const CtrlTag& tag, ConstByteSpan payload) = 0;
  std::vector<std::byte> recv_ctrl(UnitId from, const CtrlTag& tag) {
    return own_mailbox().receive(from.value, tag);
  }
  /// Wakes `to`'s pending and future control receives with a usage error.
  virtual void send_poison(UnitId to, const std::string& reason) = 0;

  const OpCounters& counters() const { return counters_; }

 protected:
  friend class Completion;
  /// Blocks until the reply for (peer, seq) has been consumed (tcp backend).
  virtual void complete(std::uint32_t peer, std::uint64_t seq);
  virtual Mailbox& own_mailbox() = 0;

  OpCounters counters_;

 private:
  UnitId self_;
  std::uint32_t n_units_;
};

namespace detail {

/// Tear-free byte copies into/out of shared segments: chunks are the largest
/// power-of-two width the shared-side address is aligned to, so naturally
/// aligned values up to 8 bytes are transferred with one atomic access.
void atomic_store_bytes(std::byte* shared_dst, const std::byte* src, std::size_t n);
void atomic_load_bytes(std::byte* dst, const std::byte* shared_src, std::size_t n);

}  // namespace detail

}  // namespace pgas

#endif  // PGAS_TRANSPORT_HPP
