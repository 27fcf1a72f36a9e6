#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "ranslice/wire/message.hpp"

namespace ranslice::wire {

/// Per-connection protocol state on one side of the link: the outgoing
/// sequence counter, the transaction-id allocator, the last sequence number
/// seen from the peer and the set of requests awaiting a reply. A session is
/// owned by one connection handler and is not thread-safe.
class Session {
 public:
  struct Pending {
    Message request;
    Millis sent_at = 0;
  };

  explicit Session(std::uint32_t last_seq = 0) : last_seq_(last_seq) {}

  /// Previous value plus one, modulo 2^32. A fresh session yields 1.
  std::uint32_t next_seq();
  /// Nonzero transaction token; 0 is reserved for unsolicited messages.
  std::uint32_t next_xid();

  /// Stamps seq (and xid when it is still 0 and `allocate_xid` is set) and
  /// returns the encoded frame.
  std::vector<std::uint8_t> stamp_and_encode(Message& msg, bool allocate_xid = false);

  /// Remembers an outgoing request so its reply can be paired.
  void track(const Message& request, Millis sent_at = 0);
  /// Removes and returns the pending request carrying resp.xid.
  /// Throws WireError(NotAResponse) for non-response actions and
  /// WireError(UnknownXid) when nothing is pending under that xid.
  Message pair_response(const Message& resp);
  bool is_pending(std::uint32_t xid) const { return pending_.contains(xid); }
  std::size_t pending_count() const { return pending_.size(); }
  const std::map<std::uint32_t, Pending>& pending() const { return pending_; }
  /// Drops a request that will never be answered (timeouts).
  void forget(std::uint32_t xid) { pending_.erase(xid); }

  /// Records an incoming seq; returns false if it is not exactly one more
  /// than the previous one (the first message may carry any value).
  bool observe_peer_seq(std::uint32_t seq);

 private:
  std::uint32_t last_seq_ = 0;
  std::uint32_t last_xid_ = 0;
  std::optional<std::uint32_t> peer_seq_;
  std::map<std::uint32_t, Pending> pending_;
};

}  // namespace ranslice::wire
