#ifndef PGAS_INPROC_TRANSPORT_HPP
#define PGAS_INPROC_TRANSPORT_HPP

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>

#include "pgas/transport.hpp"

namespace pgas {

/// Shared bootstrap and address space for units running as threads of one
/// process. Created once per SPMD run; every unit thread holds a shared_ptr.
class InProcessGroup {
 public:
  explicit InProcessGroup(std::uint32_t n_units);

  std::uint32_t n_units() const { return n_; }

  /// Blocks until all n units have arrived; the in-process rendezvous.
  void rendezvous(std::uint32_t unit, std::uint32_t timeout_ms);

  Mailbox& mailbox(std::uint32_t unit) { return *mailboxes_[unit]; }

  void register_segment(std::uint32_t unit, SegmentId id, ByteSpan span);
  void unregister_segment(std::uint32_t unit, SegmentId id);
  /// Resolves (unit, segment, offset, len); throws if unknown or out of range.
  std::byte* resolve(std::uint32_t unit, SegmentId id, std::uint64_t offset, std::uint64_t len);

 private:
  struct Registry {
    std::shared_mutex mu;
    std::map<std::uint16_t, ByteSpan> segments;
  };

  std::uint32_t n_;
  std::vector<std::unique_ptr<Mailbox>> mailboxes_;
  std::vector<std::unique_ptr<Registry>> registries_;

  std::mutex arrive_mu_;
  std::condition_variable arrive_cv_;
  std::uint32_t arrived_ = 0;
};

class InProcessTransport : public Transport {
 public:
  InProcessTransport(UnitId self, std::shared_ptr<InProcessGroup> group,
                     std::uint32_t timeout_ms);

  void register_segment(SegmentId id, ByteSpan local) override;
  void unregister_segment(SegmentId id) override;

  Completion put(UnitId target, SegmentId seg, std::uint64_t offset, ConstByteSpan src) override;
  Completion get(UnitId source, SegmentId seg, std::uint64_t offset, ByteSpan dst) override;
  void flush(UnitId target) override;
  void flush_all() override;

  void send_ctrl(UnitId to, const CtrlTag& tag, ConstByteSpan payload) override;
  void send_poison(UnitId to, const std::string& reason) override;

 protected:
  Mailbox& own_mailbox() override { return group_->mailbox(self().value); }

 private:
  std::shared_ptr<InProcessGroup> group_;
};

}  // namespace pgas

#endif  // PGAS_INPROC_TRANSPORT_HPP
