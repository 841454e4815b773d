#ifndef PGAS_ARRAY_HPP
#define PGAS_ARRAY_HPP

#include "pgas/global_iterator.hpp"

namespace pgas {

/// Zero-communication window onto the elements this unit stores, in local
/// storage order. local[2] is simply the third element stored here; its
/// global index depends on the pattern.
template <TriviallyCopyable T>
class LocalView {
 public:
  class iterator {
   public:
    using value_type = T;
    using reference = T&;
    using pointer = T*;
    using difference_type = std::ptrdiff_t;
    using iterator_category = std::random_access_iterator_tag;

    iterator() = default;
    explicit iterator(T* p) : p_(p) {}
    T& operator*() const { return *p_; }
    T* operator->() const { return p_; }
    T& operator[](difference_type k) const { return p_[k]; }
    iterator& operator++() {
      ++p_;
      return *this;
    }
    iterator operator++(int) { return iterator(p_++); }
    iterator& operator--() {
      --p_;
      return *this;
    }
    iterator operator--(int) { return iterator(p_--); }
    iterator& operator+=(difference_type k) {
      p_ += k;
      return *this;
    }
    iterator& operator-=(difference_type k) {
      p_ -= k;
      return *this;
    }
    friend iterator operator+(iterator it, difference_type k) { return it += k; }
    friend iterator operator-(iterator it, difference_type k) { return it -= k; }
    friend difference_type operator-(iterator a, iterator b) { return a.p_ - b.p_; }
    friend auto operator<=>(iterator a, iterator b) = default;

   private:
    T* p_ = nullptr;
  };

  LocalView() = default;
  LocalView(T* base, std::uint64_t count) : base_(base), count_(count) {}

  std::uint64_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  T* data() const { return base_; }

  T& operator[](std::uint64_t i) const { return base_[i]; }
  T& at(std::uint64_t i) const {
    if (i >= count_) throw pgas::range_error("local index " + std::to_string(i) +
                                             " out of range (" + std::to_string(count_) + ")");
    return base_[i];
  }

  iterator begin() const { return iterator(base_); }
  iterator end() const { return iterator(base_ + count_); }

 private:
  T* base_ = nullptr;
  std::uint64_t count_ = 0;
};

/// Fixed-size 1-D container distributed over a team. Construction is
/// collective and every member must pass identical arguments; elements are
/// not value-initialized (use the fill constructor or pgas::fill).
template <TriviallyCopyable T>
class DistributedArray {
 public:
  explicit DistributedArray(std::uint64_t n,
                            DistributionSpec dist = DistributionSpec::blocked())
      : DistributedArray(n, dist, team_all()) {}

  DistributedArray(std::uint64_t n, DistributionSpec dist, Team& team)
      : team_(&team), state_(make_state(n, dist, team)) {}

  /// Convenience: construct and fill every element with `value`.
  DistributedArray(std::uint64_t n, const T& value, DistributionSpec dist, Team& team)
      : DistributedArray(n, dist, team) {
    auto span = state_->memory.local_span();
    std::fill(span.begin(), span.end(), value);
    team.barrier();
  }

  std::uint64_t size() const { return state_->pattern.size(); }
  const Pattern& pattern() const { return state_->pattern; }
  Team& team() const { return *team_; }
  GlobalMemory<T>& memory() { return state_->memory; }

  GlobalRef<T> operator[](std::uint64_t i) {
    if (state_->memory.rt().debug_checks() && i >= size())
      throw pgas::range_error("array index " + std::to_string(i) + " out of range");
    LocalPos pos = state_->pattern.local_index_of(i);
    return state_->memory.ref_to(pos.unit, pos.offset);
  }

  GlobalRef<T> at(std::uint64_t i) {
    if (i >= size()) throw pgas::range_error("array index " + std::to_string(i) +
                                             " out of range (" + std::to_string(size()) + ")");
    LocalPos pos = state_->pattern.local_index_of(i);
    return state_->memory.ref_to(pos.unit, pos.offset);
  }

  GlobalIterator<T> begin() { return {&state_->memory, &state_->pattern, 0}; }
  GlobalIterator<T> end() { return {&state_->memory, &state_->pattern, size()}; }

  LocalView<T> local() {
    return LocalView<T>(state_->memory.local_data(), state_->memory.local_count());
  }
  T* lbegin() { return state_->memory.local_data(); }
  T* lend() { return state_->memory.local_data() + state_->memory.local_count(); }

  /// Global index of local element i on this unit.
  std::uint64_t global_index_of_local(std::uint64_t i) const {
    return state_->pattern.linear_of_local(team_->my_id().value, i);
  }

  void barrier() { team_->barrier(); }

 private:
  struct State {
    Pattern pattern;
    GlobalMemory<T> memory;
  };

  static std::unique_ptr<State> make_state(std::uint64_t n, DistributionSpec dist, Team& team) {
    if (runtime().debug_checks()) {
      std::uint64_t h = fnv1a_u64(n, fnv1a_u64(0x41525259));
      h = fnv1a_u64(static_cast<std::uint64_t>(dist.kind), h);
      h = fnv1a_u64(dist.param, h);
      h = fnv1a_u64(sizeof(T), h);
      runtime().consistency_check(team, h);
    }
    Pattern pattern = Pattern::make_1d(n, dist, team.size());
    std::uint64_t local = pattern.local_size(team.my_id().value);
    return std::unique_ptr<State>(new State{std::move(pattern),
                                            GlobalMemory<T>(team, local)});
  }

  Team* team_;
  std::unique_ptr<State> state_;
};

}  // namespace pgas

#endif  // PGAS_ARRAY_HPP
