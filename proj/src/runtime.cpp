#include "pgas/runtime.hpp"

#include <algorithm>

#include "pgas/inproc_transport.hpp"
#include "pgas/tcp_transport.hpp"

namespace pgas {

namespace {

thread_local std::unique_ptr<Runtime> tl_runtime;

constexpr std::uint64_t kKindBarrier = 0x42415252;  // arbitrary distinct kind seeds
constexpr std::uint64_t kKindSplit = 0x53504C54;
constexpr std::uint64_t kKindSplitLoc = 0x53504C4C;
constexpr std::uint64_t kKindAlloc = 0x414C4C43;

std::uint64_t mix_team_child(std::uint64_t parent_id, std::uint64_t ordinal, std::uint64_t k) {
  return fnv1a_u64(k, fnv1a_u64(ordinal, fnv1a_u64(parent_id)));
}

}  // namespace

Team::Team(Runtime* rt, std::uint64_t id, std::vector<std::uint32_t> members, const Team* parent)
    : runtime_(rt), id_(id), members_(std::move(members)), parent_(parent) {
  const std::uint32_t me = rt->my_id().value;
  for (std::uint32_t r = 0; r < members_.size(); ++r) {
    if (members_[r] == me) {
      my_rank_ = r;
      break;
    }
  }
}

UnitId Team::my_id() const {
  if (!contains_self()) throw usage_error("calling unit is not a member of this team");
  return UnitId{my_rank_};
}

void Team::barrier() { runtime_->barrier(*this); }

Team Team::split(std::uint32_t n) {
  if (!contains_self()) throw usage_error("split: calling unit is not a member of this team");
  if (n == 0 || n > size())
    throw usage_error("split: n must be between 1 and the team size");
  runtime_->consistency_check(*this, fnv1a_u64(n, fnv1a_u64(kKindSplit)));

  const std::uint32_t sz = size();
  const std::uint32_t ceil_sz = (sz + n - 1) / n;
  const std::uint32_t floor_sz = sz / n;
  const std::uint32_t m = sz % n;  // first m children take ceil_sz members
  std::uint32_t start = 0;
  std::uint32_t child = 0;
  for (; child < n; ++child) {
    std::uint32_t len = child < m ? ceil_sz : floor_sz;
    if (my_rank_ < start + len) {
      std::vector<std::uint32_t> slice(members_.begin() + start,
                                       members_.begin() + start + len);
      std::uint64_t ordinal = split_ordinal_++;
      return Team(runtime_, mix_team_child(id_, ordinal, child), std::move(slice), this);
    }
    start += len;
  }
  throw usage_error("split: internal rank partition error");
}

Team Team::split_locality(std::size_t level) {
  if (!contains_self())
    throw usage_error("split_locality: calling unit is not a member of this team");
  const auto& map = runtime_->config().locality_map;
  if (!map) throw usage_error("split_locality: no locality map configured");
  runtime_->consistency_check(*this, fnv1a_u64(level, fnv1a_u64(kKindSplitLoc)));

  const auto& groups = map->groups(level);  // throws if level too deep
  const std::uint32_t me = runtime_->my_id().value;
  std::size_t group_idx = groups.size();
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (std::find(groups[gi].begin(), groups[gi].end(), me) != groups[gi].end()) {
      group_idx = gi;
      break;
    }
  }
  if (group_idx == groups.size())
    runtime_->collective_fail(*this, "split_locality: calling unit is in no group at level " +
                                         std::to_string(level));
  const auto& group = groups[group_idx];
  std::vector<std::uint32_t> slice;
  for (auto m : members_) {
    if (std::find(group.begin(), group.end(), m) != group.end()) slice.push_back(m);
  }
  std::uint64_t ordinal = split_ordinal_++;
  return Team(runtime_, mix_team_child(id_, ordinal, group_idx), std::move(slice), this);
}

Runtime::Runtime(const RuntimeConfig& cfg) : config_(cfg) {
  if (cfg.n_units == 0) throw usage_error("n_units must be at least 1");
  if (cfg.unit.value >= cfg.n_units) throw usage_error("unit id out of range");
  switch (cfg.transport_kind) {
    case TransportKind::InProcess: {
      if (!cfg.group) throw usage_error("in-process transport requires a shared group");
      if (cfg.group->n_units() != cfg.n_units)
        throw usage_error("group size does not match n_units");
      transport_ = std::make_unique<InProcessTransport>(cfg.unit, cfg.group,
                                                        cfg.rendezvous_timeout_ms);
      break;
    }
    case TransportKind::TcpProcess: {
      if (cfg.rendezvous.empty())
        throw startup_error("tcp transport requires a rendezvous address");
      transport_ = std::make_unique<TcpTransport>(cfg.unit, cfg.n_units, cfg.rendezvous,
                                                  cfg.rendezvous_timeout_ms);
      break;
    }
  }
  std::vector<std::uint32_t> everyone(cfg.n_units);
  for (std::uint32_t u = 0; u < cfg.n_units; ++u) everyone[u] = u;
  root_.reset(new Team(this, 0, std::move(everyone), nullptr));
}

Runtime::~Runtime() = default;

void Runtime::dissemination_rounds(Team& team, std::uint64_t epoch, std::uint64_t arg_hash,
                                   bool check_hash) {
  const std::uint32_t sz = team.size();
  const std::uint32_t me = team.my_rank_;
  std::byte payload[8];
  for (int i = 0; i < 8; ++i)
    payload[i] = static_cast<std::byte>((arg_hash >> (8 * i)) & 0xff);
  for (std::uint32_t k = 0, step = 1; step < sz; ++k, step <<= 1) {
    const std::uint32_t to = (me + step) % sz;
    const std::uint32_t from = (me + sz - step) % sz;
    CtrlTag tag = make_ctrl_tag(team.id(), epoch, CtrlPhase::Barrier, k);
    transport_->send_ctrl(team.global_unit(to), tag,
                          check_hash ? ConstByteSpan{payload, 8} : ConstByteSpan{});
    auto msg = transport_->recv_ctrl(team.global_unit(from), tag);
    if (check_hash) {
      std::uint64_t theirs = 0;
      if (msg.size() == 8) {
        for (int i = 0; i < 8; ++i) theirs |= static_cast<std::uint64_t>(msg[i]) << (8 * i);
      }
      if (msg.size() != 8 || theirs != arg_hash)
        collective_fail(team, "mismatched collective arguments across team members");
    }
  }
}

void Runtime::barrier(Team& team) {
  if (!team.contains_self())
    throw usage_error("barrier: calling unit is not a member of this team");
  transport_->flush_all();
  std::uint64_t epoch = team.next_epoch();
  dissemination_rounds(team, epoch, fnv1a_u64(kKindBarrier), debug_checks());
}

void Runtime::consistency_check(Team& team, std::uint64_t arg_hash) {
  if (!debug_checks()) return;
  std::uint64_t epoch = team.next_epoch();
  dissemination_rounds(team, epoch, arg_hash, true);
}

void Runtime::collective_fail(Team& team, const std::string& reason) {
  for (auto member : team.members()) transport_->send_poison(UnitId{member}, reason);
  throw usage_error(reason);
}

void Runtime::reduce_core(Team& team, ByteSpan value, const FoldFn& fold,
                          std::uint64_t arg_hash) {
  if (!team.contains_self())
    throw usage_error("reduce: calling unit is not a member of this team");
  consistency_check(team, arg_hash);
  std::uint64_t epoch = team.next_epoch();
  CtrlTag gather = make_ctrl_tag(team.id(), epoch, CtrlPhase::Gather);
  CtrlTag bcast = make_ctrl_tag(team.id(), epoch, CtrlPhase::Broadcast);
  if (team.my_rank_ == 0) {
    for (std::uint32_t r = 1; r < team.size(); ++r) {
      auto msg = transport_->recv_ctrl(team.global_unit(r), gather);
      if (msg.size() != value.size())
        collective_fail(team, "collective value width mismatch");
      fold(value, msg);
    }
    for (std::uint32_t r = 1; r < team.size(); ++r)
      transport_->send_ctrl(team.global_unit(r), bcast, value);
  } else {
    transport_->send_ctrl(team.global_unit(0), gather, value);
    auto msg = transport_->recv_ctrl(team.global_unit(0), bcast);
    if (msg.size() != value.size())
      throw usage_error("collective value width mismatch in broadcast");
    std::memcpy(value.data(), msg.data(), value.size());
  }
}

void Runtime::broadcast_core(Team& team, ByteSpan value, std::uint32_t root_rank,
                             std::uint64_t arg_hash) {
  if (!team.contains_self())
    throw usage_error("broadcast: calling unit is not a member of this team");
  if (root_rank >= team.size()) throw usage_error("broadcast: root rank out of range");
  consistency_check(team, arg_hash);
  std::uint64_t epoch = team.next_epoch();
  CtrlTag tag = make_ctrl_tag(team.id(), epoch, CtrlPhase::Broadcast);
  if (team.my_rank_ == root_rank) {
    for (std::uint32_t r = 0; r < team.size(); ++r) {
      if (r == root_rank) continue;
      transport_->send_ctrl(team.global_unit(r), tag, value);
    }
  } else {
    auto msg = transport_->recv_ctrl(team.global_unit(root_rank), tag);
    if (msg.size() != value.size())
      throw usage_error("collective value width mismatch in broadcast");
    std::memcpy(value.data(), msg.data(), value.size());
  }
}

std::vector<std::byte> Runtime::gather_concat(Team& team, ConstByteSpan value,
                                              std::uint64_t arg_hash) {
  if (!team.contains_self())
    throw usage_error("gather: calling unit is not a member of this team");
  consistency_check(team, arg_hash);
  std::uint64_t epoch = team.next_epoch();
  CtrlTag gather = make_ctrl_tag(team.id(), epoch, CtrlPhase::Gather);
  CtrlTag bcast = make_ctrl_tag(team.id(), epoch, CtrlPhase::Broadcast);
  if (team.my_rank_ == 0) {
    std::vector<std::byte> all(value.size() * team.size());
    std::memcpy(all.data(), value.data(), value.size());
    for (std::uint32_t r = 1; r < team.size(); ++r) {
      auto msg = transport_->recv_ctrl(team.global_unit(r), gather);
      if (msg.size() != value.size())
        collective_fail(team, "collective value width mismatch");
      std::memcpy(all.data() + r * value.size(), msg.data(), msg.size());
    }
    for (std::uint32_t r = 1; r < team.size(); ++r)
      transport_->send_ctrl(team.global_unit(r), bcast, all);
    return all;
  }
  transport_->send_ctrl(team.global_unit(0), gather, value);
  auto all = transport_->recv_ctrl(team.global_unit(0), bcast);
  if (all.size() != value.size() * team.size())
    throw usage_error("collective value width mismatch in gather");
  return all;
}

SegmentId Runtime::allocate_segment(Team& team, ByteSpan local_storage) {
  if (!team.contains_self())
    throw usage_error("allocate: calling unit is not a member of this team");
  consistency_check(team, fnv1a_u64(kKindAlloc));
  std::uint32_t agreed = team.all_reduce(next_segment_id_,
                                         [](std::uint32_t a, std::uint32_t b) {
                                           return a < b ? b : a;
                                         });
  if (agreed > 0xffff)
    throw error("segment id space exhausted (more than 65535 allocation epochs)");
  next_segment_id_ = agreed + 1;
  SegmentId id{static_cast<std::uint16_t>(agreed)};
  transport_->register_segment(id, local_storage);
  auto lengths = team.all_gather<std::uint64_t>(local_storage.size());
  SegmentInfo info;
  info.members = team.members();
  info.lengths = std::move(lengths);
  info.own_base = local_storage.data();
  info.own_length = local_storage.size();
  directory_[id.value] = std::move(info);
  return id;
}

void Runtime::free_segment(SegmentId seg) {
  auto it = directory_.find(seg.value);
  if (it == directory_.end()) return;
  transport_->unregister_segment(seg);
  directory_.erase(it);
}

const SegmentInfo& Runtime::segment_info(SegmentId seg) const {
  auto it = directory_.find(seg.value);
  if (it == directory_.end())
    throw usage_error("unknown segment " + std::to_string(seg.value) +
                      " (never allocated here or already freed)");
  return it->second;
}

const SegmentInfo& Runtime::validate_access(std::uint32_t unit, SegmentId seg,
                                            std::uint64_t offset, std::uint64_t len) const {
  const SegmentInfo& info = segment_info(seg);
  auto it = std::find(info.members.begin(), info.members.end(), unit);
  if (it == info.members.end())
    throw usage_error("unit " + std::to_string(unit) + " holds no part of segment " +
                      std::to_string(seg.value));
  std::uint64_t length = info.lengths[static_cast<std::size_t>(it - info.members.begin())];
  if (offset > length || len > length - offset)
    throw pgas::range_error("access [" + std::to_string(offset) + ", " +
                            std::to_string(offset + len) + ") exceeds unit " +
                            std::to_string(unit) + "'s " + std::to_string(length) +
                            " bytes in segment " + std::to_string(seg.value));
  return info;
}

std::byte* Runtime::local_ptr(std::uint32_t unit, SegmentId seg, std::uint64_t offset,
                              std::uint64_t len) {
  if (unit != my_id().value) return nullptr;
  const SegmentInfo& info = validate_access(unit, seg, offset, len);
  return info.own_base + offset;
}

void Runtime::read_bytes(std::uint32_t unit, SegmentId seg, std::uint64_t offset, ByteSpan dst) {
  validate_access(unit, seg, offset, dst.size());
  if (unit == my_id().value) {
    detail::atomic_load_bytes(dst.data(), directory_[seg.value].own_base + offset, dst.size());
    return;
  }
  transport_->get(UnitId{unit}, seg, offset, dst).wait();
}

void Runtime::write_bytes(std::uint32_t unit, SegmentId seg, std::uint64_t offset,
                          ConstByteSpan src) {
  validate_access(unit, seg, offset, src.size());
  if (unit == my_id().value) {
    detail::atomic_store_bytes(directory_[seg.value].own_base + offset, src.data(), src.size());
    return;
  }
  transport_->put(UnitId{unit}, seg, offset, src).wait();
}

Completion Runtime::get_async(std::uint32_t unit, SegmentId seg, std::uint64_t offset,
                              ByteSpan dst) {
  validate_access(unit, seg, offset, dst.size());
  if (unit == my_id().value) {
    detail::atomic_load_bytes(dst.data(), directory_[seg.value].own_base + offset, dst.size());
    return Completion{};
  }
  return transport_->get(UnitId{unit}, seg, offset, dst);
}

Completion Runtime::put_async(std::uint32_t unit, SegmentId seg, std::uint64_t offset,
                              ConstByteSpan src) {
  validate_access(unit, seg, offset, src.size());
  if (unit == my_id().value) {
    detail::atomic_store_bytes(directory_[seg.value].own_base + offset, src.data(), src.size());
    return Completion{};
  }
  return transport_->put(UnitId{unit}, seg, offset, src);
}

Runtime& init(const RuntimeConfig& cfg) {
  if (tl_runtime) throw usage_error("init: runtime already initialized on this thread");
  tl_runtime.reset(new Runtime(cfg));
  return *tl_runtime;
}

void finalize() {
  if (!tl_runtime) throw usage_error("finalize: no active runtime (init not called, or "
                                     "finalize called twice)");
  Runtime& rt = *tl_runtime;
  if (rt.debug_checks() && rt.pending_handles() > 0)
    throw usage_error("finalize: " + std::to_string(rt.pending_handles()) +
                      " async handles still pending; wait() them first");
  rt.finalizing_ = true;
  try {
    rt.barrier(rt.team_all());
  } catch (const pgas::error&) {
    // A poisoned or broken team cannot synchronize; tear down regardless.
  }
  while (!rt.directory_.empty()) {
    rt.free_segment(SegmentId{rt.directory_.begin()->first});
  }
  if (auto* tcp = dynamic_cast<TcpTransport*>(rt.transport_.get())) tcp->shutdown();
  tl_runtime.reset();
}

bool initialized() { return static_cast<bool>(tl_runtime); }

Runtime* current_runtime_or_null() { return tl_runtime.get(); }

Runtime& runtime() {
  if (!tl_runtime) throw usage_error("runtime not initialized on this thread; call init()");
  return *tl_runtime;
}

UnitId my_id() { return runtime().my_id(); }

std::uint32_t n_units() { return runtime().n_units(); }

void barrier() { runtime().barrier(runtime().team_all()); }

Team& team_all() { return runtime().team_all(); }

}  // namespace pgas
