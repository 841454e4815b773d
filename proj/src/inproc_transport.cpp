#include "pgas/inproc_transport.hpp"

#include <chrono>
#include <cstring>

namespace pgas {

namespace detail {

namespace {

std::size_t chunk_for(const std::byte* shared_addr, std::size_t remaining) {
  auto a = reinterpret_cast<std::uintptr_t>(shared_addr);
  if (a % 8 == 0 && remaining >= 8) return 8;
  if (a % 4 == 0 && remaining >= 4) return 4;
  if (a % 2 == 0 && remaining >= 2) return 2;
  return 1;
}

}  // namespace

void atomic_store_bytes(std::byte* shared_dst, const std::byte* src, std::size_t n) {
  while (n > 0) {
    std::size_t c = chunk_for(shared_dst, n);
    switch (c) {
      case 8: {
        std::uint64_t v;
        std::memcpy(&v, src, 8);
        __atomic_store_n(reinterpret_cast<std::uint64_t*>(shared_dst), v, __ATOMIC_RELAXED);
        break;
      }
      case 4: {
        std::uint32_t v;
        std::memcpy(&v, src, 4);
        __atomic_store_n(reinterpret_cast<std::uint32_t*>(shared_dst), v, __ATOMIC_RELAXED);
        break;
      }
      case 2: {
        std::uint16_t v;
        std::memcpy(&v, src, 2);
        __atomic_store_n(reinterpret_cast<std::uint16_t*>(shared_dst), v, __ATOMIC_RELAXED);
        break;
      }
      default:
        __atomic_store_n(reinterpret_cast<std::uint8_t*>(shared_dst),
                         static_cast<std::uint8_t>(*src), __ATOMIC_RELAXED);
        break;
    }
    shared_dst += c;
    src += c;
    n -= c;
  }
}

void atomic_load_bytes(std::byte* dst, const std::byte* shared_src, std::size_t n) {
  while (n > 0) {
    std::size_t c = chunk_for(shared_src, n);
    switch (c) {
      case 8: {
        std::uint64_t v =
            __atomic_load_n(reinterpret_cast<const std::uint64_t*>(shared_src), __ATOMIC_RELAXED);
        std::memcpy(dst, &v, 8);
        break;
      }
      case 4: {
        std::uint32_t v =
            __atomic_load_n(reinterpret_cast<const std::uint32_t*>(shared_src), __ATOMIC_RELAXED);
        std::memcpy(dst, &v, 4);
        break;
      }
      case 2: {
        std::uint16_t v =
            __atomic_load_n(reinterpret_cast<const std::uint16_t*>(shared_src), __ATOMIC_RELAXED);
        std::memcpy(dst, &v, 2);
        break;
      }
      default:
        *dst = static_cast<std::byte>(
            __atomic_load_n(reinterpret_cast<const std::uint8_t*>(shared_src), __ATOMIC_RELAXED));
        break;
    }
    dst += c;
    shared_src += c;
    n -= c;
  }
}

}  // namespace detail

void Transport::complete(std::uint32_t, std::uint64_t) {}

void Completion::finish(bool nothrow) {
  if (!transport_) return;
  Transport* t = transport_;
  transport_ = nullptr;
  if (nothrow) {
    try {
      t->complete(peer_, seq_);
    } catch (...) {
    }
  } else {
    t->complete(peer_, seq_);
  }
}

InProcessGroup::InProcessGroup(std::uint32_t n_units) : n_(n_units) {
  for (std::uint32_t u = 0; u < n_; ++u) {
    mailboxes_.push_back(std::make_unique<Mailbox>());
    registries_.push_back(std::make_unique<Registry>());
  }
}

void InProcessGroup::rendezvous(std::uint32_t unit, std::uint32_t timeout_ms) {
  if (unit >= n_) throw startup_error("unit id out of range for this group");
  std::unique_lock<std::mutex> lock(arrive_mu_);
  ++arrived_;
  arrive_cv_.notify_all();
  bool ok = arrive_cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                                [&] { return arrived_ >= n_; });
  if (!ok) throw startup_error("rendezvous timeout: not all units arrived");
}

void InProcessGroup::register_segment(std::uint32_t unit, SegmentId id, ByteSpan span) {
  Registry& reg = *registries_[unit];
  std::unique_lock lock(reg.mu);
  if (!reg.segments.emplace(id.value, span).second)
    throw usage_error("segment id already registered");
}

void InProcessGroup::unregister_segment(std::uint32_t unit, SegmentId id) {
  Registry& reg = *registries_[unit];
  std::unique_lock lock(reg.mu);
  reg.segments.erase(id.value);
}

std::byte* InProcessGroup::resolve(std::uint32_t unit, SegmentId id, std::uint64_t offset,
                                   std::uint64_t len) {
  if (unit >= n_) throw usage_error("target unit out of range");
  Registry& reg = *registries_[unit];
  std::shared_lock lock(reg.mu);
  auto it = reg.segments.find(id.value);
  if (it == reg.segments.end())
    throw usage_error("unknown segment " + std::to_string(id.value) + " on unit " +
                      std::to_string(unit));
  ByteSpan span = it->second;
  if (offset > span.size() || len > span.size() - offset)
    throw pgas::range_error("segment access [" + std::to_string(offset) + ", " +
                            std::to_string(offset + len) + ") exceeds registered length " +
                            std::to_string(span.size()));
  return span.data() + offset;
}

InProcessTransport::InProcessTransport(UnitId self, std::shared_ptr<InProcessGroup> group,
                                       std::uint32_t timeout_ms)
    : Transport(self, group->n_units()), group_(std::move(group)) {
  group_->rendezvous(self.value, timeout_ms);
}

void InProcessTransport::register_segment(SegmentId id, ByteSpan local) {
  group_->register_segment(self().value, id, local);
}

void InProcessTransport::unregister_segment(SegmentId id) {
  group_->unregister_segment(self().value, id);
}

Completion InProcessTransport::put(UnitId target, SegmentId seg, std::uint64_t offset,
                                   ConstByteSpan src) {
  std::byte* dst = group_->resolve(target.value, seg, offset, src.size());
  detail::atomic_store_bytes(dst, src.data(), src.size());
  counters_.add_put(src.size());
  return Completion{};
}

Completion InProcessTransport::get(UnitId source, SegmentId seg, std::uint64_t offset,
                                   ByteSpan dst) {
  const std::byte* src = group_->resolve(source.value, seg, offset, dst.size());
  detail::atomic_load_bytes(dst.data(), src, dst.size());
  counters_.add_get(dst.size());
  return Completion{};
}

void InProcessTransport::flush(UnitId) {}

void InProcessTransport::flush_all() {}

void InProcessTransport::send_ctrl(UnitId to, const CtrlTag& tag, ConstByteSpan payload) {
  counters_.add_ctrl();
  group_->mailbox(to.value).deposit(self().value, tag,
                                    std::vector<std::byte>(payload.begin(), payload.end()));
}

void InProcessTransport::send_poison(UnitId to, const std::string& reason) {
  group_->mailbox(to.value).poison(reason);
}

}  // namespace pgas
