#ifndef PGAS_MAILBOX_HPP
#define PGAS_MAILBOX_HPP

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <vector>

#include "pgas/types.hpp"

namespace pgas {

/// Routing key for control-plane messages: collective scope (team id) plus
/// an epoch/phase/round word, so consecutive collectives never mix.
struct CtrlTag {
  std::uint64_t scope = 0;
  std::uint64_t word = 0;

  friend bool operator==(const CtrlTag& a, const CtrlTag& b) {
    return a.scope == b.scope && a.word == b.word;
  }
  friend bool operator<(const CtrlTag& a, const CtrlTag& b) {
    return a.scope != b.scope ? a.scope < b.scope : a.word < b.word;
  }
};

enum class CtrlPhase : std::uint8_t {
  Barrier = 1,
  Gather = 2,
  Broadcast = 3,
  SegmentLength = 4,
};

inline CtrlTag make_ctrl_tag(std::uint64_t team_id, std::uint64_t epoch, CtrlPhase phase,
                             std::uint32_t round = 0) {
  return CtrlTag{team_id, (epoch << 16) | (static_cast<std::uint64_t>(phase) << 8) | round};
}

/// Per-unit store of not-yet-consumed control messages. Senders (the local
/// application thread, a transport service thread, or sibling unit threads)
/// deposit; the owning application thread blocks on receive. A poisoned
/// mailbox wakes all waiters with a usage error; this is how one unit's
/// collective-argument mismatch is surfaced on every member instead of
/// deadlocking the team.
class Mailbox {
 public:
  void deposit(std::uint32_t from, const CtrlTag& tag, std::vector<std::byte> payload);
  std::vector<std::byte> receive(std::uint32_t from, const CtrlTag& tag);
  void poison(const std::string& reason);
  bool poisoned() const;

 private:
  using Key = std::pair<std::uint32_t, CtrlTag>;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<Key, std::deque<std::vector<std::byte>>> slots_;
  bool poisoned_ = false;
  std::string reason_;
};

}  // namespace pgas

#endif  // PGAS_MAILBOX_HPP
