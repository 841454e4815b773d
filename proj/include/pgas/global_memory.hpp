#ifndef PGAS_GLOBAL_MEMORY_HPP
#define PGAS_GLOBAL_MEMORY_HPP

#include <memory>
#include <span>
#include <vector>

#include "pgas/global_ptr.hpp"
#include "pgas/runtime.hpp"

namespace pgas {

/// Proxy for one element in global memory. Converting to T performs a get
/// (or a direct shared-memory read when local); assigning performs a put.
/// Nothing is cached: every load is fresh.
template <TriviallyCopyable T>
class GlobalRef {
 public:
  GlobalRef(GlobalPointer<T> target, Runtime* rt) : target_(target), rt_(rt) {}

  operator T() const { return load(); }

  GlobalRef& operator=(const T& value) {
    store(value);
    return *this;
  }
  GlobalRef& operator=(const GlobalRef& other) {
    store(other.load());
    return *this;
  }

  T load() const {
    T out;
    rt_->read_bytes(target_.unit, SegmentId{target_.segment}, target_.offset,
                    {reinterpret_cast<std::byte*>(&out), sizeof(T)});
    return out;
  }

  void store(const T& value) {
    rt_->write_bytes(target_.unit, SegmentId{target_.segment}, target_.offset,
                     {reinterpret_cast<const std::byte*>(&value), sizeof(T)});
  }

  GlobalPointer<T> pointer() const { return target_; }

  /// Raw local address when this unit owns the element, else nullptr.
  T* local() const {
    return reinterpret_cast<T*>(
        rt_->local_ptr(target_.unit, SegmentId{target_.segment}, target_.offset, sizeof(T)));
  }

 private:
  GlobalPointer<T> target_;
  Runtime* rt_;
};

/// Pending asynchronous transfers; wait() is idempotent. Destroying an
/// unwaited handle waits silently — call wait() to observe errors. finalize()
/// refuses to run while handles are outstanding (debug mode).
class AsyncHandle {
 public:
  AsyncHandle() = default;
  explicit AsyncHandle(Runtime* rt) : rt_(rt) {
    if (rt_) rt_->note_handle_created();
  }

  AsyncHandle(AsyncHandle&& other) noexcept { *this = std::move(other); }
  AsyncHandle& operator=(AsyncHandle&& other) noexcept {
    if (this != &other) {
      settle(true);
      ops_ = std::move(other.ops_);
      rt_ = other.rt_;
      other.rt_ = nullptr;
      other.ops_.clear();
    }
    return *this;
  }
  AsyncHandle(const AsyncHandle&) = delete;
  AsyncHandle& operator=(const AsyncHandle&) = delete;

  ~AsyncHandle() { settle(true); }

  void add(Completion c) { ops_.push_back(std::move(c)); }

  void wait() { settle(false); }

 private:
  void settle(bool nothrow) {
    if (!rt_ && ops_.empty()) return;
    Runtime* rt = rt_;
    rt_ = nullptr;
    std::exception_ptr first;
    for (auto& op : ops_) {
      try {
        op.wait();
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
    ops_.clear();
    if (rt) rt->note_handle_settled();
    if (first && !nothrow) std::rethrow_exception(first);
  }

  std::vector<Completion> ops_;
  Runtime* rt_ = nullptr;
};

/// A chunk of global memory allocated collectively over a team: every member
/// contributes local_count elements (counts may differ). Element i of a
/// member lives at byte offset i * sizeof(T) in its portion.
template <TriviallyCopyable T>
class GlobalMemory {
 public:
  GlobalMemory(Team& team, std::uint64_t local_count)
      : rt_(&runtime()),
        team_(&team),
        local_count_(local_count),
        storage_(local_count ? std::make_unique<std::byte[]>(local_count * sizeof(T))
                             : nullptr) {
    segment_ = rt_->allocate_segment(team, {storage_.get(), local_count * sizeof(T)});
    const auto& info = rt_->segment_info(segment_);
    counts_.reserve(info.lengths.size());
    for (auto bytes : info.lengths) counts_.push_back(bytes / sizeof(T));
  }

  ~GlobalMemory() { release(); }

  GlobalMemory(GlobalMemory&& other) noexcept
      : rt_(other.rt_),
        team_(other.team_),
        segment_(other.segment_),
        local_count_(other.local_count_),
        counts_(std::move(other.counts_)),
        storage_(std::move(other.storage_)) {
    other.rt_ = nullptr;
  }
  GlobalMemory& operator=(GlobalMemory&&) = delete;
  GlobalMemory(const GlobalMemory&) = delete;
  GlobalMemory& operator=(const GlobalMemory&) = delete;

  Team& team() const { return *team_; }
  SegmentId segment() const { return segment_; }
  std::uint32_t n_ranks() const { return static_cast<std::uint32_t>(counts_.size()); }
  std::uint64_t local_count(std::uint32_t team_rank) const { return counts_.at(team_rank); }
  std::uint64_t local_count() const { return local_count_; }

  T* local_data() { return reinterpret_cast<T*>(storage_.get()); }
  const T* local_data() const { return reinterpret_cast<const T*>(storage_.get()); }
  std::span<T> local_span() { return {local_data(), local_count_}; }

  GlobalPointer<T> pointer_to(std::uint32_t team_rank, std::uint64_t local_index) const {
    return GlobalPointer<T>{team_->global_unit(team_rank).value, segment_.value, 0,
                            local_index * sizeof(T)};
  }

  GlobalRef<T> ref_to(std::uint32_t team_rank, std::uint64_t local_index) const {
    return GlobalRef<T>(pointer_to(team_rank, local_index), rt_);
  }

  Completion get_async(std::uint32_t team_rank, std::uint64_t local_index, std::span<T> dst) {
    return rt_->get_async(team_->global_unit(team_rank).value, segment_,
                          local_index * sizeof(T),
                          {reinterpret_cast<std::byte*>(dst.data()), dst.size_bytes()});
  }

  Completion put_async(std::uint32_t team_rank, std::uint64_t local_index,
                       std::span<const T> src) {
    return rt_->put_async(team_->global_unit(team_rank).value, segment_,
                          local_index * sizeof(T),
                          {reinterpret_cast<const std::byte*>(src.data()), src.size_bytes()});
  }

  Runtime& rt() const { return *rt_; }

 private:
  void release() {
    if (!rt_) return;
    if (current_runtime_or_null() == rt_) {
      // Deallocation is collective like allocation: no member may drop its
      // portion while others can still address it.
      try {
        team_->barrier();
      } catch (const pgas::error&) {
        // poisoned or torn-down team: free locally regardless
      }
      rt_->free_segment(segment_);
    }
    rt_ = nullptr;
  }

  Runtime* rt_ = nullptr;
  Team* team_ = nullptr;
  SegmentId segment_{};
  std::uint64_t local_count_ = 0;
  std::vector<std::uint64_t> counts_;
  std::unique_ptr<std::byte[]> storage_;
};

/// T* for a local global pointer, nullptr for a remote one.
template <TriviallyCopyable T>
T* local_ptr(const GlobalPointer<T>& p) {
  return reinterpret_cast<T*>(
      runtime().local_ptr(p.unit, SegmentId{p.segment}, p.offset, sizeof(T)));
}

/// Dereference a global pointer into a reference proxy: deref(p) = 42 puts.
template <TriviallyCopyable T>
GlobalRef<T> deref(const GlobalPointer<T>& p) {
  return GlobalRef<T>(p, &runtime());
}

}  // namespace pgas

#endif  // PGAS_GLOBAL_MEMORY_HPP
