#include "pgas/tcp_transport.hpp"

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

namespace pgas {

namespace {

constexpr std::uint64_t kMaxOutstandingOps = 64;
constexpr std::uint64_t kMaxOutstandingBytes = 1u << 20;

std::vector<std::byte> pack_tagged(const CtrlTag& tag, ConstByteSpan payload) {
  std::vector<std::byte> out(16 + payload.size());
  net::store_le64(out.data(), tag.scope);
  net::store_le64(out.data() + 8, tag.word);
  if (!payload.empty()) std::memcpy(out.data() + 16, payload.data(), payload.size());
  return out;
}

}  // namespace

TcpTransport::TcpTransport(UnitId self, std::uint32_t n_units,
                           const std::string& rendezvous_addr, std::uint32_t timeout_ms)
    : Transport(self, n_units), peers_(n_units) {
  listener_ = net::Listener::open();
  if (::pipe(wake_pipe_) != 0) throw transport_error("cannot create wake pipe");

  // Serve inbound connections from peers that learn our address first.
  service_ = std::thread([this] { service_loop(); });

  try {
    net::Socket rv = net::connect_to(rendezvous_addr, timeout_ms);
    rv.set_recv_timeout_ms(timeout_ms);
    const std::string& addr = listener_.address();
    net::Frame reg;
    reg.op = net::Opcode::Ctrl;
    reg.unit = self.value;
    reg.payload = pack_tagged(CtrlTag{0, 0}, {reinterpret_cast<const std::byte*>(addr.data()),
                                              addr.size()});
    net::write_frame(rv, reg);

    auto table = net::read_frame(rv);
    if (!table) throw startup_error("rendezvous closed before sending the address table");
    if (table->payload.size() < 20) throw startup_error("malformed rendezvous table");
    const std::byte* p = table->payload.data() + 16;
    std::uint32_t n = net::load_le32(p);
    p += 4;
    if (n != n_units) throw startup_error("rendezvous table size mismatch");
    std::vector<std::string> addresses(n_units);
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t unit = net::load_le32(p);
      std::uint32_t len = net::load_le32(p + 4);
      p += 8;
      addresses.at(unit).assign(reinterpret_cast<const char*>(p), len);
      p += len;
    }

    for (std::uint32_t u = 0; u < n_units; ++u) {
      if (u == self.value) continue;
      peers_[u].sock = net::connect_to(addresses[u], timeout_ms);
    }
  } catch (...) {
    shutting_down_.store(true);
    char b = 1;
    (void)!::write(wake_pipe_[1], &b, 1);
    if (service_.joinable()) service_.join();
    ::close(wake_pipe_[0]);
    ::close(wake_pipe_[1]);
    try {
      throw;
    } catch (const startup_error&) {
      throw;
    } catch (const transport_error& e) {
      // e.g. the rendezvous read timing out because peers never registered
      throw startup_error(std::string("rendezvous failed: ") + e.what());
    }
  }
}

TcpTransport::~TcpTransport() {
  try {
    shutdown();
  } catch (...) {
  }
}

void TcpTransport::shutdown() {
  if (shut_) return;
  shut_ = true;
  shutting_down_.store(true);
  char b = 1;
  (void)!::write(wake_pipe_[1], &b, 1);
  for (auto& peer : peers_) peer.sock.close();
  if (service_.joinable()) service_.join();
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
}

void TcpTransport::register_segment(SegmentId id, ByteSpan local) {
  std::unique_lock lock(segments_mu_);
  if (!segments_.emplace(id.value, local).second)
    throw usage_error("segment id already registered");
}

void TcpTransport::unregister_segment(SegmentId id) {
  std::unique_lock lock(segments_mu_);
  segments_.erase(id.value);
}

std::byte* TcpTransport::resolve_own(SegmentId seg, std::uint64_t offset, std::uint64_t len) {
  std::shared_lock lock(segments_mu_);
  auto it = segments_.find(seg.value);
  if (it == segments_.end())
    throw usage_error("unknown segment " + std::to_string(seg.value));
  ByteSpan span = it->second;
  if (offset > span.size() || len > span.size() - offset)
    throw pgas::range_error("segment access [" + std::to_string(offset) + ", " +
                            std::to_string(offset + len) + ") exceeds registered length " +
                            std::to_string(span.size()));
  return span.data() + offset;
}

Completion TcpTransport::put(UnitId target, SegmentId seg, std::uint64_t offset,
                             ConstByteSpan src) {
  counters_.add_put(src.size());
  if (target == self()) {
    std::byte* dst = resolve_own(seg, offset, src.size());
    detail::atomic_store_bytes(dst, src.data(), src.size());
    return Completion{};
  }
  Peer& peer = peers_.at(target.value);
  net::Frame f;
  f.op = net::Opcode::Put;
  f.seg = seg.value;
  f.unit = self().value;
  f.offset = offset;
  f.len = static_cast<std::uint32_t>(src.size());
  net::write_frame(peer.sock, f, src);
  peer.dirty = true;
  // The bytes are in the connection once write_frame returns: local complete.
  return Completion{};
}

Completion TcpTransport::get(UnitId source, SegmentId seg, std::uint64_t offset, ByteSpan dst) {
  counters_.add_get(dst.size());
  if (source == self()) {
    const std::byte* src = resolve_own(seg, offset, dst.size());
    detail::atomic_load_bytes(dst.data(), src, dst.size());
    return Completion{};
  }
  Peer& peer = peers_.at(source.value);
  maybe_apply_backpressure(peer);
  net::Frame f;
  f.op = net::Opcode::Get;
  f.seg = seg.value;
  f.unit = self().value;
  f.offset = offset;
  f.len = static_cast<std::uint32_t>(dst.size());
  net::write_frame(peer.sock, f);
  peer.pending.push_back({net::Opcode::Get, dst.data(), f.len});
  peer.outstanding_bytes += dst.size();
  std::uint64_t seq = peer.issued++;
  return Completion{this, source.value, seq};
}

void TcpTransport::maybe_apply_backpressure(Peer& peer) {
  while (peer.issued - peer.done >= kMaxOutstandingOps ||
         peer.outstanding_bytes >= kMaxOutstandingBytes) {
    drain_one(peer);
  }
}

void TcpTransport::drain_one(Peer& peer) {
  auto frame = net::read_frame(peer.sock);
  if (!frame) throw transport_error("peer closed while replies were pending");
  if (peer.pending.empty()) throw transport_error("unexpected reply frame");
  PendingOp op = peer.pending.front();
  peer.pending.pop_front();
  peer.done++;
  if (op.kind == net::Opcode::Get) {
    peer.outstanding_bytes -= op.len;
    if (frame->op != net::Opcode::GetReply) throw transport_error("reply out of order");
    if (frame->offset == net::kReplyError)
      throw pgas::range_error("remote get rejected: out of range or unknown segment");
    if (frame->payload.size() != op.len) throw transport_error("short get reply");
    std::memcpy(op.dst, frame->payload.data(), op.len);
  } else {
    if (frame->op != net::Opcode::FlushAck) throw transport_error("reply out of order");
    if (frame->offset != 0)
      throw pgas::range_error("remote put rejected: out of range or unknown segment");
  }
}

void TcpTransport::complete(std::uint32_t peer_id, std::uint64_t seq) {
  Peer& peer = peers_.at(peer_id);
  while (peer.done <= seq) drain_one(peer);
}

void TcpTransport::flush(UnitId target) {
  if (target == self()) return;
  Peer& peer = peers_.at(target.value);
  if (!peer.dirty) return;
  net::Frame f;
  f.op = net::Opcode::Flush;
  f.unit = self().value;
  net::write_frame(peer.sock, f);
  peer.pending.push_back({net::Opcode::Flush, nullptr, 0});
  std::uint64_t seq = peer.issued++;
  peer.dirty = false;
  while (peer.done <= seq) drain_one(peer);
}

void TcpTransport::flush_all() {
  for (std::uint32_t u = 0; u < world_size(); ++u) {
    if (peers_[u].dirty) flush(UnitId{u});
  }
}

void TcpTransport::send_ctrl(UnitId to, const CtrlTag& tag, ConstByteSpan payload) {
  counters_.add_ctrl();
  if (to == self()) {
    mailbox_.deposit(self().value, tag, std::vector<std::byte>(payload.begin(), payload.end()));
    return;
  }
  Peer& peer = peers_.at(to.value);
  net::Frame f;
  f.op = net::Opcode::Ctrl;
  f.unit = self().value;
  f.payload = pack_tagged(tag, payload);
  f.len = static_cast<std::uint32_t>(f.payload.size());
  net::write_frame(peer.sock, f);
}

void TcpTransport::send_poison(UnitId to, const std::string& reason) {
  if (to == self()) {
    mailbox_.poison(reason);
    return;
  }
  Peer& peer = peers_.at(to.value);
  net::Frame f;
  f.op = net::Opcode::Ctrl;
  f.unit = self().value;
  f.payload = pack_tagged(CtrlTag{kPoisonScope, 0},
                          {reinterpret_cast<const std::byte*>(reason.data()), reason.size()});
  f.len = static_cast<std::uint32_t>(f.payload.size());
  try {
    net::write_frame(peer.sock, f);
  } catch (const transport_error&) {
    // Peer already gone; nothing to poison.
  }
}

void TcpTransport::serve_frame(net::Socket& sock, net::Frame frame, std::uint64_t& put_errors) {
  switch (frame.op) {
    case net::Opcode::Put: {
      try {
        std::byte* dst = resolve_own(SegmentId{frame.seg}, frame.offset, frame.payload.size());
        detail::atomic_store_bytes(dst, frame.payload.data(), frame.payload.size());
      } catch (const pgas::error&) {
        ++put_errors;
      }
      break;
    }
    case net::Opcode::Get: {
      net::Frame reply;
      reply.op = net::Opcode::GetReply;
      reply.seg = frame.seg;
      reply.unit = self().value;
      try {
        const std::byte* src = resolve_own(SegmentId{frame.seg}, frame.offset, frame.len);
        reply.payload.resize(frame.len);
        detail::atomic_load_bytes(reply.payload.data(), src, frame.len);
        reply.len = frame.len;
      } catch (const pgas::error&) {
        reply.payload.clear();
        reply.offset = net::kReplyError;
      }
      net::write_frame(sock, reply);
      break;
    }
    case net::Opcode::Flush: {
      net::Frame ack;
      ack.op = net::Opcode::FlushAck;
      ack.unit = self().value;
      ack.offset = put_errors;
      put_errors = 0;
      net::write_frame(sock, ack);
      break;
    }
    case net::Opcode::Barrier:
    case net::Opcode::Ctrl: {
      if (frame.payload.size() < 16) throw transport_error("short control frame");
      CtrlTag tag{net::load_le64(frame.payload.data()), net::load_le64(frame.payload.data() + 8)};
      std::vector<std::byte> body(frame.payload.begin() + 16, frame.payload.end());
      if (tag.scope == kPoisonScope) {
        mailbox_.poison(std::string(reinterpret_cast<const char*>(body.data()), body.size()));
      } else {
        mailbox_.deposit(frame.unit, tag, std::move(body));
      }
      break;
    }
    default:
      throw transport_error("unexpected opcode on service connection");
  }
}

void TcpTransport::service_loop() {
  struct Conn {
    net::Socket sock;
    std::uint64_t put_errors = 0;
  };
  std::vector<Conn> conns;
  bool listening = true;

  while (true) {
    std::vector<pollfd> fds;
    fds.push_back({wake_pipe_[0], POLLIN, 0});
    if (listening) fds.push_back({listener_.fd(), POLLIN, 0});
    for (auto& c : conns) fds.push_back({c.sock.fd(), POLLIN, 0});

    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      return;
    }

    std::size_t idx = 0;
    if (fds[idx].revents & POLLIN) {
      char buf[16];
      (void)!::read(wake_pipe_[0], buf, sizeof(buf));
    }
    ++idx;
    if (shutting_down_.load() && listening) {
      listener_.close();
      listening = false;
      // Keep serving until every peer has closed its outbound connection.
      if (conns.empty()) return;
      continue;
    }
    if (listening) {
      if (fds[idx].revents & POLLIN) {
        try {
          conns.push_back({listener_.accept(), 0});
        } catch (const transport_error&) {
        }
        continue;  // fd set changed
      }
      ++idx;
    }
    for (std::size_t i = 0; i < conns.size(); ++i, ++idx) {
      if (!(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      bool drop = false;
      try {
        auto frame = net::read_frame(conns[i].sock);
        if (!frame) {
          drop = true;
        } else {
          serve_frame(conns[i].sock, std::move(*frame), conns[i].put_errors);
        }
      } catch (const pgas::error&) {
        drop = true;
      }
      if (drop) {
        conns.erase(conns.begin() + static_cast<std::ptrdiff_t>(i));
        break;  // fd set changed
      }
    }
    if (!listening && conns.empty() && shutting_down_.load()) return;
  }
}

RendezvousServer::RendezvousServer(std::uint32_t n_units, const std::string& host,
                                   std::uint16_t port)
    : n_(n_units) {
  listener_ = net::Listener::open(host, port);
}

void RendezvousServer::serve() {
  std::vector<net::Socket> socks;
  std::vector<std::string> addresses(n_, "");
  std::vector<std::uint32_t> order;
  for (std::uint32_t i = 0; i < n_; ++i) {
    net::Socket s = listener_.accept();
    auto frame = net::read_frame(s);
    if (!frame || frame->op != net::Opcode::Ctrl || frame->payload.size() < 16)
      throw startup_error("malformed rendezvous registration");
    std::uint32_t unit = frame->unit;
    if (unit >= n_ || !addresses[unit].empty())
      throw startup_error("duplicate or out-of-range unit id in rendezvous");
    addresses[unit].assign(reinterpret_cast<const char*>(frame->payload.data() + 16),
                           frame->payload.size() - 16);
    order.push_back(unit);
    socks.push_back(std::move(s));
  }

  std::vector<std::byte> table;
  {
    std::byte tmp[4];
    net::store_le32(tmp, n_);
    table.insert(table.end(), tmp, tmp + 4);
    for (std::uint32_t u = 0; u < n_; ++u) {
      std::byte head[8];
      net::store_le32(head, u);
      net::store_le32(head + 4, static_cast<std::uint32_t>(addresses[u].size()));
      table.insert(table.end(), head, head + 8);
      auto* p = reinterpret_cast<const std::byte*>(addresses[u].data());
      table.insert(table.end(), p, p + addresses[u].size());
    }
  }
  for (std::size_t i = 0; i < socks.size(); ++i) {
    net::Frame f;
    f.op = net::Opcode::Ctrl;
    f.unit = order[i];
    f.payload = pack_tagged(CtrlTag{0, 0}, table);
    f.len = static_cast<std::uint32_t>(f.payload.size());
    net::write_frame(socks[i], f);
  }
}

}  // namespace pgas
