#ifndef PGAS_MATRIX_HPP
#define PGAS_MATRIX_HPP

#include <optional>

#include "pgas/global_iterator.hpp"

namespace pgas {

template <TriviallyCopyable T, std::size_t D>
class DistributedMatrix;

/// Axis-aligned box view into a matrix; aliases, never copies. Iteration
/// visits the box coordinates in the matrix's memory order.
template <TriviallyCopyable T, std::size_t D>
class MatrixView {
 public:
  MatrixView(DistributedMatrix<T, D>* parent, std::array<std::uint64_t, D> lo,
             std::array<std::uint64_t, D> hi)
      : parent_(parent), lo_(lo), hi_(hi) {}

  std::uint64_t extent(std::size_t dim) const { return hi_[dim] - lo_[dim]; }
  std::uint64_t size() const {
    std::uint64_t s = 1;
    for (std::size_t k = 0; k < D; ++k) s *= extent(k);
    return s;
  }

  /// Further restriction along one dimension, in parent-matrix coordinates.
  MatrixView sub(std::size_t dim, std::uint64_t lo, std::uint64_t hi) const {
    if (dim >= D) throw usage_error("view dimension out of range");
    if (lo >= hi || lo < lo_[dim] || hi > hi_[dim])
      throw usage_error("empty, inverted, or out-of-box view range");
    MatrixView out = *this;
    out.lo_[dim] = lo;
    out.hi_[dim] = hi;
    return out;
  }

  /// Coordinates of the i-th element of the view in view iteration order.
  std::array<std::uint64_t, D> coord_at(std::uint64_t i) const;

  GlobalRef<T> ref_at(std::uint64_t i) const;

  class iterator {
   public:
    using value_type = T;
    using reference = GlobalRef<T>;
    using difference_type = std::int64_t;
    using iterator_category = std::random_access_iterator_tag;

    iterator() = default;
    iterator(const MatrixView* view, std::uint64_t i) : view_(view), i_(i) {}
    reference operator*() const { return view_->ref_at(i_); }
    iterator& operator++() {
      ++i_;
      return *this;
    }
    iterator operator++(int) { return iterator(view_, i_++); }
    iterator& operator+=(difference_type k) {
      i_ += k;
      return *this;
    }
    friend iterator operator+(iterator it, difference_type k) { return it += k; }
    friend difference_type operator-(iterator a, iterator b) {
      return static_cast<difference_type>(a.i_) - static_cast<difference_type>(b.i_);
    }
    friend bool operator==(iterator a, iterator b) { return a.i_ == b.i_; }
    friend bool operator!=(iterator a, iterator b) { return a.i_ != b.i_; }

   private:
    const MatrixView* view_ = nullptr;
    std::uint64_t i_ = 0;
  };

  iterator begin() const { return iterator(this, 0); }
  iterator end() const { return iterator(this, size()); }

  /// Gathers the box into dst in view iteration order (one-sided, local
  /// completion on return). Contiguous same-owner stretches coalesce into
  /// block transfers.
  void copy_into(std::span<T> dst) const;

 private:
  DistributedMatrix<T, D>* parent_;
  std::array<std::uint64_t, D> lo_;
  std::array<std::uint64_t, D> hi_;
};

/// Fixed-size N-dimensional container distributed over a team. Default
/// distribution: BLOCKED along dimension 0, NONE elsewhere.
template <TriviallyCopyable T, std::size_t D>
class DistributedMatrix {
  static_assert(D >= 1 && D <= kMaxDims);

 public:
  struct Options {
    std::array<DistributionSpec, D> dists = default_dists();
    std::optional<TeamSpec> teamspec;
    MemoryOrder order = MemoryOrder::RowMajor;
  };

  static std::array<DistributionSpec, D> default_dists() {
    std::array<DistributionSpec, D> d;
    d[0] = DistributionSpec::blocked();
    for (std::size_t k = 1; k < D; ++k) d[k] = DistributionSpec::none();
    return d;
  }

  explicit DistributedMatrix(std::array<std::uint64_t, D> extents, Options options = {})
      : DistributedMatrix(extents, options, team_all()) {}

  DistributedMatrix(std::array<std::uint64_t, D> extents, Options options, Team& team)
      : team_(&team), state_(make_state(extents, options, team)) {}

  /// 2-D convenience: rows x cols with the default distribution.
  DistributedMatrix(std::uint64_t rows, std::uint64_t cols)
    requires(D == 2)
      : DistributedMatrix(std::array<std::uint64_t, 2>{rows, cols}) {}

  std::uint64_t extent(std::size_t dim) const { return state_->pattern.extent(dim); }
  std::uint64_t size() const { return state_->pattern.size(); }
  const Pattern& pattern() const { return state_->pattern; }
  Team& team() const { return *team_; }
  GlobalMemory<T>& memory() { return state_->memory; }

  template <typename... Ix>
    requires(sizeof...(Ix) == D)
  GlobalRef<T> at(Ix... ix) {
    std::array<std::uint64_t, D> coord{static_cast<std::uint64_t>(ix)...};
    for (std::size_t k = 0; k < D; ++k) {
      if (coord[k] >= extent(k))
        throw pgas::range_error("matrix coordinate out of range in dimension " +
                                std::to_string(k));
    }
    LocalPos pos = state_->pattern.local_index_of(coord);
    return state_->memory.ref_to(pos.unit, pos.offset);
  }

  GlobalRef<T> at_coord(std::span<const std::uint64_t> coord) {
    LocalPos pos = state_->pattern.local_index_of(coord);
    return state_->memory.ref_to(pos.unit, pos.offset);
  }

  /// Whole-matrix view restricted along one dimension.
  MatrixView<T, D> sub(std::size_t dim, std::uint64_t lo, std::uint64_t hi) {
    return whole().sub(dim, lo, hi);
  }

  MatrixView<T, D> whole() {
    std::array<std::uint64_t, D> lo{};
    std::array<std::uint64_t, D> hi{};
    for (std::size_t k = 0; k < D; ++k) hi[k] = extent(k);
    return MatrixView<T, D>(this, lo, hi);
  }

  /// The axis-aligned box of one distribution block.
  MatrixView<T, D> block(std::array<std::uint64_t, D> block_coord) {
    std::array<std::uint64_t, D> lo{};
    std::array<std::uint64_t, D> hi{};
    for (std::size_t k = 0; k < D; ++k) {
      std::uint64_t b = state_->pattern.block_extent(k);
      if (block_coord[k] >= state_->pattern.num_blocks(k))
        throw pgas::range_error("block coordinate out of range in dimension " +
                                std::to_string(k));
      lo[k] = block_coord[k] * b;
      hi[k] = std::min(lo[k] + b, extent(k));
    }
    return MatrixView<T, D>(this, lo, hi);
  }

  /// Global iteration in the pattern's canonical (memory-order) element
  /// sequence.
  GlobalIterator<T> begin() { return {&state_->memory, &state_->pattern, 0}; }
  GlobalIterator<T> end() { return {&state_->memory, &state_->pattern, size()}; }

  std::span<T> local_span() { return state_->memory.local_span(); }

  void barrier() { team_->barrier(); }

 private:
  struct State {
    Pattern pattern;
    GlobalMemory<T> memory;
  };

  static std::unique_ptr<State> make_state(std::array<std::uint64_t, D> extents,
                                           const Options& options, Team& team) {
    std::vector<DistributionSpec> dists(options.dists.begin(), options.dists.end());
    TeamSpec ts = options.teamspec
                      ? *options.teamspec
                      : TeamSpec::default_for(dists, D, team.size());
    if (ts.size() != team.size())
      throw usage_error("teamspec available units (" + std::to_string(ts.size()) +
                        ") do not match the team size (" + std::to_string(team.size()) + ")");
    if (runtime().debug_checks()) {
      std::uint64_t h = fnv1a_u64(0x4D545258);
      for (std::size_t k = 0; k < D; ++k) {
        h = fnv1a_u64(extents[k], h);
        h = fnv1a_u64(static_cast<std::uint64_t>(options.dists[k].kind), h);
        h = fnv1a_u64(options.dists[k].param, h);
        h = fnv1a_u64(ts.extent(k), h);
      }
      h = fnv1a_u64(static_cast<std::uint64_t>(options.order), h);
      h = fnv1a_u64(sizeof(T), h);
      runtime().consistency_check(team, h);
    }
    Pattern pattern(std::vector<std::uint64_t>(extents.begin(), extents.end()),
                    std::move(dists), std::move(ts), options.order);
    std::uint64_t local = pattern.local_size(team.my_id().value);
    return std::unique_ptr<State>(new State{std::move(pattern),
                                            GlobalMemory<T>(team, local)});
  }

  Team* team_;
  std::unique_ptr<State> state_;
};

template <TriviallyCopyable T, std::size_t D>
std::array<std::uint64_t, D> MatrixView<T, D>::coord_at(std::uint64_t i) const {
  std::array<std::uint64_t, D> coord{};
  const MemoryOrder order = parent_->pattern().order();
  for (std::size_t j = D; j-- > 0;) {
    std::size_t k = order == MemoryOrder::RowMajor ? j : D - 1 - j;
    std::uint64_t e = extent(k);
    coord[k] = lo_[k] + (e ? i % e : 0);
    i /= e ? e : 1;
  }
  return coord;
}

template <TriviallyCopyable T, std::size_t D>
GlobalRef<T> MatrixView<T, D>::ref_at(std::uint64_t i) const {
  auto coord = coord_at(i);
  LocalPos pos = parent_->pattern().local_index_of(coord);
  return parent_->memory().ref_to(pos.unit, pos.offset);
}

template <TriviallyCopyable T, std::size_t D>
void MatrixView<T, D>::copy_into(std::span<T> dst) const {
  if (dst.size() != size()) throw usage_error("destination does not match the view size");
  AsyncHandle handle(&parent_->memory().rt());
  std::uint64_t run_start = 0;
  std::uint32_t run_unit = 0;
  std::uint64_t run_local = 0;
  std::uint64_t run_len = 0;
  auto flush_run = [&] {
    if (run_len == 0) return;
    handle.add(parent_->memory().get_async(run_unit, run_local,
                                           dst.subspan(run_start, run_len)));
    run_len = 0;
  };
  const std::uint64_t total = size();
  for (std::uint64_t i = 0; i < total; ++i) {
    auto coord = coord_at(i);
    LocalPos pos = parent_->pattern().local_index_of(coord);
    if (run_len > 0 && pos.unit == run_unit && pos.offset == run_local + run_len) {
      ++run_len;
      continue;
    }
    flush_run();
    run_start = i;
    run_unit = pos.unit;
    run_local = pos.offset;
    run_len = 1;
  }
  flush_run();
  handle.wait();
}

}  // namespace pgas

#endif  // PGAS_MATRIX_HPP
