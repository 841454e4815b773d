#ifndef PGAS_PATTERN_HPP
#define PGAS_PATTERN_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "pgas/types.hpp"

namespace pgas {

/// Per-dimension distribution of global indices onto a team grid.
enum class Dist : std::uint8_t {
  Blocked,      // one contiguous block per unit, size ceil(n/t)
  BlockCyclic,  // fixed-size blocks dealt round-robin
  None,         // dimension not distributed
  Tile,         // like BlockCyclic for ownership, tile-contiguous locally
};

struct DistributionSpec {
  Dist kind = Dist::Blocked;
  std::uint64_t param = 0;  // block size for BlockCyclic/Tile

  static constexpr DistributionSpec blocked() { return {Dist::Blocked, 0}; }
  // CYCLIC is an alias for BLOCKCYCLIC(1); normalized here, at construction.
  static constexpr DistributionSpec cyclic() { return {Dist::BlockCyclic, 1}; }
  static constexpr DistributionSpec block_cyclic(std::uint64_t b) { return {Dist::BlockCyclic, b}; }
  static constexpr DistributionSpec none() { return {Dist::None, 0}; }
  static constexpr DistributionSpec tile(std::uint64_t b) { return {Dist::Tile, b}; }

  friend constexpr bool operator==(DistributionSpec a, DistributionSpec b) {
    return a.kind == b.kind && a.param == b.param;
  }
};

enum class MemoryOrder : std::uint8_t { RowMajor, ColMajor };

inline constexpr std::size_t kMaxDims = 8;

/// Fixed-capacity coordinate tuple; avoids allocation in the mapping paths.
class Coords {
 public:
  Coords() = default;
  Coords(std::initializer_list<std::uint64_t> init) : n_(init.size()) {
    std::size_t i = 0;
    for (auto v : init) v_[i++] = v;
  }
  Coords(std::span<const std::uint64_t> init) : n_(init.size()) {
    for (std::size_t i = 0; i < n_; ++i) v_[i] = init[i];
  }
  static Coords zeros(std::size_t n) {
    Coords c;
    c.n_ = n;
    c.v_.fill(0);
    return c;
  }

  std::size_t size() const { return n_; }
  std::uint64_t& operator[](std::size_t i) { return v_[i]; }
  std::uint64_t operator[](std::size_t i) const { return v_[i]; }
  std::span<const std::uint64_t> view() const { return {v_.data(), n_}; }

  friend bool operator==(const Coords& a, const Coords& b) {
    if (a.n_ != b.n_) return false;
    for (std::size_t i = 0; i < a.n_; ++i)
      if (a.v_[i] != b.v_[i]) return false;
    return true;
  }

 private:
  std::array<std::uint64_t, kMaxDims> v_{};
  std::size_t n_ = 0;
};

/// Arrangement of a team as a d-dimensional grid. Unit grid coordinates
/// linearize row-major into team ranks, independent of element order.
class TeamSpec {
 public:
  TeamSpec() = default;
  TeamSpec(std::initializer_list<std::uint32_t> extents);
  explicit TeamSpec(std::span<const std::uint32_t> extents);

  /// All units along the first non-None dimension, 1 elsewhere.
  static TeamSpec default_for(std::span<const DistributionSpec> dists, std::size_t ndim,
                              std::uint32_t team_size);

  std::size_t ndim() const { return extents_.size(); }
  std::uint32_t extent(std::size_t dim) const { return extents_[dim]; }
  std::uint32_t size() const;
  std::span<const std::uint32_t> extents() const { return extents_; }

  std::uint32_t rank_of(std::span<const std::uint32_t> grid_coord) const;
  Coords grid_coord_of(std::uint32_t rank) const;

 private:
  std::vector<std::uint32_t> extents_;
};

/// Where one global element lives: owning team rank and local linear offset.
struct LocalPos {
  std::uint32_t unit = 0;
  std::uint64_t offset = 0;

  friend bool operator==(const LocalPos& a, const LocalPos& b) {
    return a.unit == b.unit && a.offset == b.offset;
  }
};

/// N-dimensional bijection between global element coordinates and
/// (owning unit, local offset) pairs. Immutable after construction and safe
/// to share across threads.
class Pattern {
 public:
  Pattern(std::vector<std::uint64_t> extents, std::vector<DistributionSpec> dists,
          TeamSpec teamspec, MemoryOrder order = MemoryOrder::RowMajor);

  /// 1-D convenience: extent n over team_size units.
  static Pattern make_1d(std::uint64_t n, DistributionSpec dist, std::uint32_t team_size);

  std::size_t ndim() const { return extents_.size(); }
  std::uint64_t extent(std::size_t dim) const { return extents_[dim]; }
  std::span<const std::uint64_t> extents() const { return extents_; }
  std::uint64_t size() const { return total_; }
  const TeamSpec& teamspec() const { return teamspec_; }
  std::uint32_t team_size() const { return teamspec_.size(); }
  MemoryOrder order() const { return order_; }
  DistributionSpec dist(std::size_t dim) const { return dists_[dim]; }
  /// Effective block size along a dimension (Blocked: ceil(n/t), None: n).
  std::uint64_t block_extent(std::size_t dim) const { return block_[dim]; }
  /// Number of blocks along a dimension (ceil(n/B)).
  std::uint64_t num_blocks(std::size_t dim) const;
  bool tiled() const { return tiled_; }

  std::uint32_t unit_of(std::span<const std::uint64_t> coord) const;
  LocalPos local_index_of(std::span<const std::uint64_t> coord) const;
  Coords global_coord_of(std::uint32_t unit, std::uint64_t local_offset) const;

  std::uint64_t local_size(std::uint32_t unit) const;
  Coords local_extents(std::uint32_t unit) const;

  /// Canonical linearization of global coordinates per MemoryOrder.
  std::uint64_t linear_of(std::span<const std::uint64_t> coord) const;
  Coords coord_of_linear(std::uint64_t index) const;

  /// Global linear index -> (unit, local offset); fast path for 1-D.
  LocalPos map_linear(std::uint64_t index) const;
  /// Inverse: (unit, local offset) -> global linear index.
  std::uint64_t linear_of_local(std::uint32_t unit, std::uint64_t local_offset) const;

  // 1-D convenience overloads.
  std::uint32_t unit_of(std::uint64_t index) const;
  LocalPos local_index_of(std::uint64_t index) const;

  /// A maximal run of global indices that is contiguous both globally and in
  /// the owner's local storage (1-D patterns only).
  struct Run {
    std::uint32_t unit;
    std::uint64_t local_offset;
    std::uint64_t global_begin;
    std::uint64_t length;
  };

  /// Visit the runs covering [first, last) in ascending global order.
  template <typename Fn>
  void for_each_run(std::uint64_t first, std::uint64_t last, Fn&& fn) const;

  /// Visit only the runs owned by `unit`, ascending global order.
  template <typename Fn>
  void for_each_local_run(std::uint32_t unit, std::uint64_t first, std::uint64_t last,
                          Fn&& fn) const;

  friend bool operator==(const Pattern& a, const Pattern& b);

 private:
  void validate() const;
  std::uint64_t local_extent_dim(std::size_t dim, std::uint32_t grid_coord) const;
  std::uint64_t tile_local_offset(std::span<const std::uint64_t> coord, const Coords& grid) const;
  Coords tile_coord_of_local(const Coords& grid, std::uint64_t offset) const;

  std::vector<std::uint64_t> extents_;
  std::vector<DistributionSpec> dists_;
  TeamSpec teamspec_;
  MemoryOrder order_;
  std::vector<std::uint64_t> block_;  // per-dim effective block extent
  std::uint64_t total_ = 0;
  bool tiled_ = false;
};

/// Parses the textual pattern grammar:
///   <extent>("x"<extent>)* <dist>(","<dist>)* ["team" <t>("x"<t>)*] ["row"|"col"]
/// with dist in {BLOCKED, CYCLIC, BLOCKCYCLIC(<b>), NONE, TILE(<b>)}.
/// When the team clause is omitted, the default teamspec for
/// `default_team_size` units is used. Throws parse_error with position.
Pattern parse_pattern_spec(std::string_view text, std::uint32_t default_team_size = 4);

template <typename Fn>
void Pattern::for_each_run(std::uint64_t first, std::uint64_t last, Fn&& fn) const {
  if (ndim() != 1) throw usage_error("run iteration requires a 1-D pattern");
  if (last > extents_[0]) last = extents_[0];
  const std::uint64_t b = block_[0];
  std::uint64_t g = first;
  while (g < last) {
    std::uint64_t block_end = (g / b + 1) * b;
    if (block_end > last) block_end = last;
    LocalPos pos = local_index_of(g);
    fn(Run{pos.unit, pos.offset, g, block_end - g});
    g = block_end;
  }
}

template <typename Fn>
void Pattern::for_each_local_run(std::uint32_t unit, std::uint64_t first, std::uint64_t last,
                                 Fn&& fn) const {
  if (ndim() != 1) throw usage_error("run iteration requires a 1-D pattern");
  if (last > extents_[0]) last = extents_[0];
  if (first >= last) return;
  const std::uint64_t b = block_[0];
  const std::uint64_t t = teamspec_.extent(0);
  const std::uint64_t u = teamspec_.grid_coord_of(unit)[0];
  if (dists_[0].kind == Dist::None) {
    if (u != 0) return;
    LocalPos pos = local_index_of(first);
    fn(Run{unit, pos.offset, first, last - first});
    return;
  }
  const std::uint64_t cycle = b * t;
  // First cycle whose block [c*cycle + u*b, +b) can intersect [first, last).
  std::uint64_t c = first <= u * b ? 0 : (first - u * b) / cycle;
  for (;; ++c) {
    std::uint64_t begin = c * cycle + u * b;
    if (begin >= last) break;
    std::uint64_t end = begin + b;
    if (end > last) end = last;
    if (begin < first) begin = first;
    if (begin >= end) continue;
    LocalPos pos = local_index_of(begin);
    fn(Run{unit, pos.offset, begin, end - begin});
  }
}

}  // namespace pgas

#endif  // PGAS_PATTERN_HPP
