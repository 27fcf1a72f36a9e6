#include "ranslice/wire/session.hpp"

namespace ranslice::wire {

std::uint32_t Session::next_seq() { return ++last_seq_; }

std::uint32_t Session::next_xid() {
  if (++last_xid_ == 0) ++last_xid_;
  return last_xid_;
}

std::vector<std::uint8_t> Session::stamp_and_encode(Message& msg, bool allocate_xid) {
  if (allocate_xid && msg.header.xid == 0) msg.header.xid = next_xid();
  // Checked before stamping so a malformed message does not consume a seq.
  check_well_formed(msg);
  msg.header.seq = next_seq();
  return encode(msg);
}

void Session::track(const Message& request, Millis sent_at) {
  pending_[request.header.xid] = Pending{request, sent_at};
}

Message Session::pair_response(const Message& resp) {
  if (!is_response(resp.event.action))
    throw WireError(WireErrc::NotAResponse, to_string(resp.event.action) + " is not a response");
  auto it = pending_.find(resp.header.xid);
  if (it == pending_.end())
    throw WireError(WireErrc::UnknownXid, "no pending request with xid " + std::to_string(resp.header.xid));
  Message req = std::move(it->second.request);
  pending_.erase(it);
  return req;
}

bool Session::observe_peer_seq(std::uint32_t seq) {
  bool ok = !peer_seq_ || seq == static_cast<std::uint32_t>(*peer_seq_ + 1);
  peer_seq_ = seq;
  return ok;
}

}  // namespace ranslice::wire
