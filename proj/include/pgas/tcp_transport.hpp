#ifndef PGAS_TCP_TRANSPORT_HPP
#define PGAS_TCP_TRANSPORT_HPP

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "pgas/net.hpp"
#include "pgas/transport.hpp"

namespace pgas {

/// Control tag scope reserved for poisoning a peer's mailbox.
inline constexpr std::uint64_t kPoisonScope = ~std::uint64_t{0};

/// One-sided transport over TCP between processes on one machine (or a
/// trusted network). Each unit owns one outbound connection per peer used
/// for its requests and the peer's replies; a hidden service thread accepts
/// inbound connections and serves put/get/ctrl traffic, giving true
/// one-sidedness. Replies arrive in issue order per peer, so completions
/// match FIFO without sequence numbers on the wire.
class TcpTransport : public Transport {
 public:
  TcpTransport(UnitId self, std::uint32_t n_units, const std::string& rendezvous_addr,
               std::uint32_t timeout_ms);
  ~TcpTransport() override;

  void register_segment(SegmentId id, ByteSpan local) override;
  void unregister_segment(SegmentId id) override;

  Completion put(UnitId target, SegmentId seg, std::uint64_t offset, ConstByteSpan src) override;
  Completion get(UnitId source, SegmentId seg, std::uint64_t offset, ByteSpan dst) override;
  void flush(UnitId target) override;
  void flush_all() override;

  void send_ctrl(UnitId to, const CtrlTag& tag, ConstByteSpan payload) override;
  void send_poison(UnitId to, const std::string& reason) override;

  /// Collective teardown helper: must be called after a final barrier; closes
  /// outbound connections and joins the service thread.
  void shutdown();

  const std::string& listen_address() const { return listener_.address(); }

 protected:
  void complete(std::uint32_t peer, std::uint64_t seq) override;
  Mailbox& own_mailbox() override { return mailbox_; }

 private:
  struct PendingOp {
    net::Opcode kind;
    std::byte* dst = nullptr;
    std::uint32_t len = 0;
  };

  struct Peer {
    net::Socket sock;
    std::uint64_t issued = 0;  // replies expected so far
    std::uint64_t done = 0;    // replies consumed so far
    std::deque<PendingOp> pending;
    std::uint64_t outstanding_bytes = 0;
    bool dirty = false;  // puts since last flush
  };

  void service_loop();
  void serve_frame(net::Socket& sock, net::Frame frame, std::uint64_t& put_errors);
  std::byte* resolve_own(SegmentId seg, std::uint64_t offset, std::uint64_t len);
  void drain_one(Peer& peer);
  void maybe_apply_backpressure(Peer& peer);

  net::Listener listener_;
  std::vector<Peer> peers_;
  Mailbox mailbox_;

  std::shared_mutex segments_mu_;
  std::map<std::uint16_t, ByteSpan> segments_;

  std::thread service_;
  std::atomic<bool> shutting_down_{false};
  int wake_pipe_[2] = {-1, -1};
  bool shut_ = false;
};

/// Accepts the registration of n units, then sends each the full
/// (unit, address) table. Used by the launcher, the benchmark driver, and
/// process-based tests.
class RendezvousServer {
 public:
  explicit RendezvousServer(std::uint32_t n_units, const std::string& host = "127.0.0.1",
                            std::uint16_t port = 0);

  const std::string& address() const { return listener_.address(); }

  /// Blocks until all units registered and the table was distributed.
  void serve();

 private:
  std::uint32_t n_;
  net::Listener listener_;
};

}  // namespace pgas

#endif  // PGAS_TCP_TRANSPORT_HPP
