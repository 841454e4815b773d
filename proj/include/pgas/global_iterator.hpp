#ifndef PGAS_GLOBAL_ITERATOR_HPP
#define PGAS_GLOBAL_ITERATOR_HPP

#include <iterator>

#include "pgas/global_memory.hpp"
#include "pgas/pattern.hpp"

namespace pgas {

/// Random-access iterator over a pattern-distributed chunk of global memory.
/// Keeps a plain integer index and converts on demand to a GlobalPointer via
/// the pattern, so it can walk across unit boundaries (which raw pointer
/// arithmetic cannot: the unit id there never changes).
template <TriviallyCopyable T>
class GlobalIterator {
 public:
  using value_type = T;
  using difference_type = std::int64_t;
  using reference = GlobalRef<T>;
  using iterator_category = std::random_access_iterator_tag;

  GlobalIterator() = default;
  GlobalIterator(GlobalMemory<T>* mem, const Pattern* pattern, std::uint64_t index)
      : mem_(mem), pattern_(pattern), index_(index) {}

  std::uint64_t index() const { return index_; }
  GlobalMemory<T>* memory() const { return mem_; }
  const Pattern* pattern() const { return pattern_; }

  reference operator*() const {
    if (index_ >= pattern_->size())
      throw pgas::range_error("dereference past the end of the range");
    LocalPos pos = pattern_->map_linear(index_);
    return mem_->ref_to(pos.unit, pos.offset);
  }
  reference operator[](difference_type k) const { return *(*this + k); }

  /// On-demand conversion; only valid for dereferenceable positions.
  GlobalPointer<T> to_global_pointer() const {
    if (index_ >= pattern_->size())
      throw pgas::range_error("end iterator has no global pointer");
    LocalPos pos = pattern_->map_linear(index_);
    return mem_->pointer_to(pos.unit, pos.offset);
  }

  /// Raw local address when this unit owns the element, else nullptr.
  T* local() const { return (**this).local(); }

  GlobalIterator& operator++() {
    ++index_;
    return *this;
  }
  GlobalIterator operator++(int) {
    GlobalIterator old = *this;
    ++index_;
    return old;
  }
  GlobalIterator& operator--() {
    --index_;
    return *this;
  }
  GlobalIterator operator--(int) {
    GlobalIterator old = *this;
    --index_;
    return old;
  }
  GlobalIterator& operator+=(difference_type k) {
    index_ = static_cast<std::uint64_t>(static_cast<difference_type>(index_) + k);
    return *this;
  }
  GlobalIterator& operator-=(difference_type k) { return *this += -k; }

  friend GlobalIterator operator+(GlobalIterator it, difference_type k) { return it += k; }
  friend GlobalIterator operator+(difference_type k, GlobalIterator it) { return it += k; }
  friend GlobalIterator operator-(GlobalIterator it, difference_type k) { return it -= k; }
  friend difference_type operator-(const GlobalIterator& a, const GlobalIterator& b) {
    return static_cast<difference_type>(a.index_) - static_cast<difference_type>(b.index_);
  }

  friend bool operator==(const GlobalIterator& a, const GlobalIterator& b) {
    return a.index_ == b.index_ && a.mem_ == b.mem_;
  }
  friend bool operator!=(const GlobalIterator& a, const GlobalIterator& b) { return !(a == b); }
  friend bool operator<(const GlobalIterator& a, const GlobalIterator& b) {
    return a.index_ < b.index_;
  }
  friend bool operator<=(const GlobalIterator& a, const GlobalIterator& b) {
    return a.index_ <= b.index_;
  }
  friend bool operator>(const GlobalIterator& a, const GlobalIterator& b) {
    return a.index_ > b.index_;
  }
  friend bool operator>=(const GlobalIterator& a, const GlobalIterator& b) {
    return a.index_ >= b.index_;
  }

 private:
  GlobalMemory<T>* mem_ = nullptr;
  const Pattern* pattern_ = nullptr;
  std::uint64_t index_ = 0;
};

namespace detail {

template <TriviallyCopyable T, typename EmitRun>
void for_each_range_run(const GlobalIterator<T>& first, const GlobalIterator<T>& last,
                        EmitRun&& emit) {
  const Pattern& p = *first.pattern();
  if (first.index() > last.index()) throw usage_error("inverted iterator range");
  if (p.ndim() == 1) {
    p.for_each_run(first.index(), last.index(), [&](Pattern::Run r) {
      emit(r.unit, r.local_offset, r.global_begin - first.index(), r.length);
    });
    return;
  }
  for (std::uint64_t i = first.index(); i < last.index(); ++i) {
    LocalPos pos = p.map_linear(i);
    emit(pos.unit, pos.offset, i - first.index(), 1);
  }
}

}  // namespace detail

/// Starts copying [first, last) into buffer (global iteration order); the
/// transfer is complete after wait() on the returned handle.
template <TriviallyCopyable T>
AsyncHandle get_block_async(GlobalIterator<T> first, GlobalIterator<T> last, std::span<T> dst) {
  if (static_cast<std::uint64_t>(dst.size()) != static_cast<std::uint64_t>(last - first))
    throw usage_error("destination length does not match range length");
  AsyncHandle handle(&first.memory()->rt());
  detail::for_each_range_run(first, last,
                             [&](std::uint32_t rank, std::uint64_t local, std::uint64_t at,
                                 std::uint64_t len) {
                               handle.add(first.memory()->get_async(
                                   rank, local, dst.subspan(at, len)));
                             });
  return handle;
}

/// Starts copying buffer into [first, last); wait() gives local completion,
/// remote visibility needs a flush or barrier.
template <TriviallyCopyable T>
AsyncHandle put_block_async(std::span<const T> src, GlobalIterator<T> first,
                            GlobalIterator<T> last) {
  if (static_cast<std::uint64_t>(src.size()) != static_cast<std::uint64_t>(last - first))
    throw usage_error("source length does not match range length");
  AsyncHandle handle(&first.memory()->rt());
  detail::for_each_range_run(first, last,
                             [&](std::uint32_t rank, std::uint64_t local, std::uint64_t at,
                                 std::uint64_t len) {
                               handle.add(first.memory()->put_async(
                                   rank, local, src.subspan(at, len)));
                             });
  return handle;
}

}  // namespace pgas

#endif  // PGAS_GLOBAL_ITERATOR_HPP
