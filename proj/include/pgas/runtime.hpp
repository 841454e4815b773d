#ifndef PGAS_RUNTIME_HPP
#define PGAS_RUNTIME_HPP

#include <bit>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <type_traits>
#include <vector>

#include "pgas/config.hpp"
#include "pgas/transport.hpp"
#include "pgas/types.hpp"

namespace pgas {

class Runtime;

template <typename T>
concept TriviallyCopyable = std::is_trivially_copyable_v<T>;

/// An ordered set of units; the scope of every collective and allocation.
/// Move-only: a team handle represents physical resources and is never
/// duplicated. Parents must outlive (and not be moved while) their children
/// are in use.
class Team {
 public:
  Team(const Team&) = delete;
  Team& operator=(const Team&) = delete;
  Team(Team&& other) noexcept = default;
  Team& operator=(Team&& other) noexcept = default;

  std::uint64_t id() const { return id_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(members_.size()); }
  /// Global unit ids, in team rank order.
  const std::vector<std::uint32_t>& members() const { return members_; }
  UnitId global_unit(std::uint32_t rank) const { return UnitId{members_.at(rank)}; }
  bool contains_self() const { return my_rank_ != kNotMember; }
  /// This unit's zero-based rank within the team.
  UnitId my_id() const;
  const Team* parent() const { return parent_; }

  void barrier();

  /// Splits into n children of near-equal contiguous rank ranges; the first
  /// (size mod n) children take ceil(size/n) members, the rest floor.
  Team split(std::uint32_t n);

  /// Child team for this unit's locality group at the given level of the
  /// configured locality map.
  Team split_locality(std::size_t level);

  /// Deterministic left fold of every member's contribution in rank order;
  /// every member receives the result.
  template <TriviallyCopyable T, typename Op>
  T all_reduce(const T& value, Op op);

  template <TriviallyCopyable T>
  T broadcast(const T& value, UnitId root_rank);

  /// Rank-ordered concatenation of every member's fixed-width contribution.
  template <TriviallyCopyable T>
  std::vector<T> all_gather(const T& value);

 private:
  friend class Runtime;
  static constexpr std::uint32_t kNotMember = ~std::uint32_t{0};

  Team(Runtime* rt, std::uint64_t id, std::vector<std::uint32_t> members, const Team* parent);

  std::uint64_t next_epoch() { return ++collective_epoch_; }

  Runtime* runtime_ = nullptr;
  std::uint64_t id_ = 0;
  std::vector<std::uint32_t> members_;
  std::uint32_t my_rank_ = kNotMember;
  const Team* parent_ = nullptr;
  std::uint64_t collective_epoch_ = 0;
  std::uint64_t split_ordinal_ = 0;
};

struct SegmentInfo {
  std::vector<std::uint32_t> members;  // global unit ids, team order
  std::vector<std::uint64_t> lengths;  // bytes registered per member
  std::byte* own_base = nullptr;
  std::uint64_t own_length = 0;
};

/// Per-unit runtime context: transport, root team, segment directory.
/// Installed as the calling thread's current runtime by init().
class Runtime {
 public:
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  UnitId my_id() const { return transport_->self(); }
  std::uint32_t n_units() const { return transport_->world_size(); }
  Team& team_all() { return *root_; }
  Transport& transport() { return *transport_; }
  const RuntimeConfig& config() const { return config_; }
  bool debug_checks() const { return config_.debug_checks; }

  // -- collective segment management --------------------------------------

  /// Collective over `team`: agrees on a fresh segment id, registers
  /// `local_storage` and exchanges per-member lengths.
  SegmentId allocate_segment(Team& team, ByteSpan local_storage);
  void free_segment(SegmentId seg);
  const SegmentInfo& segment_info(SegmentId seg) const;

  // -- one-sided data plane -------------------------------------------------

  /// Local address for (unit, seg, offset) when unit == my_id(), else null.
  std::byte* local_ptr(std::uint32_t unit, SegmentId seg, std::uint64_t offset,
                       std::uint64_t len);
  void read_bytes(std::uint32_t unit, SegmentId seg, std::uint64_t offset, ByteSpan dst);
  void write_bytes(std::uint32_t unit, SegmentId seg, std::uint64_t offset, ConstByteSpan src);
  Completion get_async(std::uint32_t unit, SegmentId seg, std::uint64_t offset, ByteSpan dst);
  Completion put_async(std::uint32_t unit, SegmentId seg, std::uint64_t offset,
                       ConstByteSpan src);
  void flush(std::uint32_t unit) { transport_->flush(UnitId{unit}); }
  void flush_all() { transport_->flush_all(); }

  // -- byte-level collective cores -----------------------------------------

  using FoldFn = std::function<void(ByteSpan acc, ConstByteSpan in)>;

  void barrier(Team& team);
  void reduce_core(Team& team, ByteSpan value, const FoldFn& fold, std::uint64_t arg_hash);
  void broadcast_core(Team& team, ByteSpan value, std::uint32_t root_rank,
                      std::uint64_t arg_hash);
  std::vector<std::byte> gather_concat(Team& team, ConstByteSpan value, std::uint64_t arg_hash);

  /// Debug-mode consistency fence: dissemination barrier carrying a hash of
  /// the collective's arguments; a mismatch poisons the whole team.
  void consistency_check(Team& team, std::uint64_t arg_hash);

  /// Poisons every member's control plane and throws usage_error.
  [[noreturn]] void collective_fail(Team& team, const std::string& reason);

  // -- async bookkeeping (finalize precondition) -----------------------------

  void note_handle_created() { ++pending_handles_; }
  void note_handle_settled() { --pending_handles_; }
  std::uint64_t pending_handles() const { return pending_handles_; }

  /// Test hook: force the next agreed segment id (e.g. near the 16-bit cap).
  void set_next_segment_id(std::uint32_t id) { next_segment_id_ = id; }

 private:
  friend Runtime& init(const RuntimeConfig&);
  friend void finalize();
  explicit Runtime(const RuntimeConfig& cfg);

  void dissemination_rounds(Team& team, std::uint64_t epoch, std::uint64_t arg_hash,
                            bool check_hash);
  const SegmentInfo& validate_access(std::uint32_t unit, SegmentId seg, std::uint64_t offset,
                                     std::uint64_t len) const;

  RuntimeConfig config_;
  std::unique_ptr<Transport> transport_;
  std::unique_ptr<Team> root_;
  std::map<std::uint16_t, SegmentInfo> directory_;
  std::uint32_t next_segment_id_ = 1;  // 0 reserved for runtime control
  std::uint64_t pending_handles_ = 0;
  bool finalizing_ = false;
};

/// Initializes the calling unit's runtime; exactly once per unit.
Runtime& init(const RuntimeConfig& cfg);
/// Collective teardown; acts as a final barrier.
void finalize();
bool initialized();
/// The calling thread's runtime; throws usage_error before init().
Runtime& runtime();
/// Like runtime(), but returns nullptr instead of throwing.
Runtime* current_runtime_or_null();

UnitId my_id();
std::uint32_t n_units();
void barrier();
Team& team_all();

// ---- templated collective wrappers ----------------------------------------

template <TriviallyCopyable T, typename Op>
T Team::all_reduce(const T& value, Op op) {
  T acc = value;
  auto fold = [&op](ByteSpan a, ConstByteSpan in) {
    T lhs, rhs;
    std::memcpy(&lhs, a.data(), sizeof(T));
    std::memcpy(&rhs, in.data(), sizeof(T));
    lhs = op(lhs, rhs);
    std::memcpy(a.data(), &lhs, sizeof(T));
  };
  std::uint64_t hash = fnv1a_u64(sizeof(T), fnv1a_u64(0x52454455));  // kind: reduce
  runtime_->reduce_core(*this, {reinterpret_cast<std::byte*>(&acc), sizeof(T)}, fold, hash);
  return acc;
}

template <TriviallyCopyable T>
T Team::broadcast(const T& value, UnitId root_rank) {
  T out = value;
  std::uint64_t hash =
      fnv1a_u64(sizeof(T), fnv1a_u64(root_rank.value, fnv1a_u64(0x42435354)));  // kind: bcast
  runtime_->broadcast_core(*this, {reinterpret_cast<std::byte*>(&out), sizeof(T)},
                           root_rank.value, hash);
  return out;
}

template <TriviallyCopyable T>
std::vector<T> Team::all_gather(const T& value) {
  std::uint64_t hash = fnv1a_u64(sizeof(T), fnv1a_u64(0x47415448));  // kind: gather
  auto bytes = runtime_->gather_concat(
      *this, {reinterpret_cast<const std::byte*>(&value), sizeof(T)}, hash);
  std::vector<T> out(size());
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace pgas

#endif  // PGAS_RUNTIME_HPP
