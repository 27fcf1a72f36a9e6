#pragma once

// Southbound controller <-> agent protocol.
//
// Frame layout (big-endian):
//
//   common header (24 octets)
//     u8  version        always 1
//     u8  event_type     0=Single 1=Scheduled 2=Triggered
//     u32 length         octets of the whole frame
//     u64 element_id     eNB ID
//     u16 cell_id
//     u32 xid            transaction token, echoed by replies
//     u32 seq            per-connection, per-sender counter
//   event header (9 octets)
//     u16 action
//     u8  opcode         0=Success 1=Create 2=Retrieve 3=Update 4=Delete 255=Error
//     u16 error_code     nonzero iff opcode=Error
//     u32 period_ms      nonzero iff event_type=Scheduled
//   body                 fixed-order fields, lists prefixed by a u16 count
//
// docs/wire.md lists every body layout.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ranslice/common/ids.hpp"
#include "ranslice/policy/template.hpp"

namespace ranslice::wire {

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kCommonHeaderSize = 24;
inline constexpr std::size_t kEventHeaderSize = 9;
inline constexpr std::size_t kHeaderSize = kCommonHeaderSize + kEventHeaderSize;

enum class EventType : std::uint8_t { Single = 0, Scheduled = 1, Triggered = 2 };

enum class Action : std::uint16_t {
  HelloReq = 1,
  HelloResp = 2,
  CapsReq = 3,
  CapsResp = 4,
  UeReportReq = 5,
  UeReportResp = 6,
  AddSliceReq = 7,
  AddSliceResp = 8,
  RemoveSliceReq = 9,
  RemoveSliceResp = 10,
  RanSliceReq = 11,
  RanSliceResp = 12,
  AcReq = 13,
  AcResp = 14,
  SliceMeas = 15,
};

inline constexpr std::uint16_t kMinAction = 1;
inline constexpr std::uint16_t kMaxAction = 15;

enum class OpKind : std::uint8_t {
  Success = 0,
  Create = 1,
  Retrieve = 2,
  Update = 3,
  Delete = 4,
  Error = 255,
};

/// Agent-side error codes carried with OpKind::Error.
enum class AgentErrc : std::uint16_t {
  DuplicateSlice = 1,
  ShareOverflow = 2,
  UnknownSlice = 3,
  SlicingUnsupported = 4,
  BadRequest = 5,
};

struct Opcode {
  OpKind kind = OpKind::Success;
  std::uint16_t error_code = 0;

  static Opcode success() { return {}; }
  static Opcode of(OpKind k) { return {k, 0}; }
  static Opcode error(std::uint16_t code) { return {OpKind::Error, code}; }
  static Opcode error(AgentErrc code) { return error(static_cast<std::uint16_t>(code)); }
  bool is_error() const { return kind == OpKind::Error; }
  bool operator==(const Opcode&) const = default;
};

struct CommonHeader {
  std::uint8_t version = kProtocolVersion;
  EventType event_type = EventType::Single;
  EnbId element_id = 0;
  CellId cell_id = 0;
  std::uint32_t xid = 0;
  std::uint32_t seq = 0;

  bool operator==(const CommonHeader&) const = default;
};

struct EventHeader {
  Action action = Action::HelloReq;
  Opcode opcode;
  std::uint32_t period_ms = 0;

  bool operator==(const EventHeader&) const = default;
};

// --- bodies -----------------------------------------------------------------

struct HelloReq {
  bool operator==(const HelloReq&) const = default;
};
struct HelloResp {
  bool operator==(const HelloResp&) const = default;
};
struct CapsReq {
  bool operator==(const CapsReq&) const = default;
};

struct CellCaps {
  CellId cell_id = 0;
  std::uint32_t dl_earfcn = 0;
  std::uint32_t ul_earfcn = 0;
  std::uint16_t n_prb = 0;
  bool operator==(const CellCaps&) const = default;
};

struct CapsResp {
  EnbId enb_id = 0;
  std::vector<CellCaps> cells;
  bool slicing_supported = false;
  bool operator==(const CapsResp&) const = default;
};

struct UeReportReq {
  bool operator==(const UeReportReq&) const = default;
};

struct DrbInfo {
  std::uint8_t drb_id = 1;
  policy::QosProfile qos;
  bool operator==(const DrbInfo&) const = default;
};

struct UeRecord {
  CellId cell_id = 0;
  std::string plmn_id;
  NasId nas_id;
  Rnti rnti = 0;
  /// Slice the eNB associated the UE with, when resolved.
  std::optional<RsiId> rsi_id;
  std::vector<DrbInfo> drbs;
  bool operator==(const UeRecord&) const = default;
};

struct UeReportResp {
  std::vector<UeRecord> ues;
  bool operator==(const UeReportResp&) const = default;
};

struct AddSliceReq {
  RsiId rsi_id = 0;
  policy::RsiTemplate tpl;
  bool operator==(const AddSliceReq&) const = default;
};
struct AddSliceResp {
  RsiId rsi_id = 0;
  bool operator==(const AddSliceResp&) const = default;
};
struct RemoveSliceReq {
  RsiId rsi_id = 0;
  bool operator==(const RemoveSliceReq&) const = default;
};
struct RemoveSliceResp {
  RsiId rsi_id = 0;
  bool operator==(const RemoveSliceResp&) const = default;
};

/// Descriptor update and/or (de)activation for one registered slice. With
/// opcode Retrieve both optionals are empty and only the view is requested.
struct RanSliceReq {
  RsiId rsi_id = 0;
  std::optional<policy::RrmPolicy> policy;
  std::optional<bool> active;
  bool operator==(const RanSliceReq&) const = default;
};

struct SliceStatus {
  RsiId rsi_id = 0;
  policy::RrmPolicy policy;
  bool active = false;
  std::uint16_t ue_count = 0;
  bool operator==(const SliceStatus&) const = default;
};

struct RanSliceResp {
  std::vector<SliceStatus> slices;
  bool operator==(const RanSliceResp&) const = default;
};

struct AcReq {
  Rnti rnti = 0;
  std::vector<policy::DrbRequest> drbs;
  bool operator==(const AcReq&) const = default;
};

struct AcResp {
  Rnti rnti = 0;
  bool accepted = false;
  bool operator==(const AcResp&) const = default;
};

struct SliceMeas {
  RsiId rsi_id = 0;
  std::uint32_t dl_prb_assigned = 0;
  std::uint32_t dl_prb_used = 0;
  std::uint32_t ul_prb_assigned = 0;
  std::uint32_t ul_prb_used = 0;
  std::uint32_t interval_ms = 0;
  bool operator==(const SliceMeas&) const = default;
};

// Variant order matches Action numbering (index + 1).
using Body = std::variant<HelloReq, HelloResp, CapsReq, CapsResp, UeReportReq, UeReportResp,
                          AddSliceReq, AddSliceResp, RemoveSliceReq, RemoveSliceResp, RanSliceReq,
                          RanSliceResp, AcReq, AcResp, SliceMeas>;

struct Message {
  CommonHeader header;
  EventHeader event;
  Body body;

  bool operator==(const Message&) const = default;
};

Action action_of(const Body& body);
bool is_response(Action a);
/// Response action paired with a request action, if any.
std::optional<Action> response_for(Action request);
std::string to_string(Action a);
std::string to_string(EventType t);
std::string to_string(Opcode op);

/// Builds a message whose event header action is taken from the body.
Message make_message(EventType type, EnbId element, CellId cell, Opcode op, Body body,
                     std::uint32_t period_ms = 0);

// --- codec --------------------------------------------------------------------

enum class WireErrc {
  WellFormedness,
  Truncated,
  BadVersion,
  UnknownAction,
  BodyMismatch,
  Malformed,
  UnknownXid,
  NotAResponse,
};

std::string to_string(WireErrc code);

class WireError : public std::runtime_error {
 public:
  WireError(WireErrc code, const std::string& what);
  WireErrc code() const { return code_; }

 private:
  WireErrc code_;
};

/// Serializes a well-formed message; throws WireError(WellFormedness).
std::vector<std::uint8_t> encode(const Message& msg);
std::size_t encoded_length(const Message& msg);
/// Throws WireError(WellFormedness) if not encodable.
void check_well_formed(const Message& msg);

struct Decoded {
  Message message;
  std::size_t consumed = 0;
};

/// Decodes the frame at the head of `bytes`, consuming exactly its length
/// field. Trailing octets are left for the next call.
Decoded decode_frame(std::span<const std::uint8_t> bytes);
/// Decodes a buffer holding exactly one frame.
Message decode(std::span<const std::uint8_t> bytes);

/// Length of the frame at the head of `bytes` once the length field is
/// available, nullopt before that.
std::optional<std::uint32_t> peek_frame_length(std::span<const std::uint8_t> bytes);

/// Reassembles frames from a byte stream.
class FrameSplitter {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete message, nullopt if more bytes are needed. Decode errors
  /// propagate; the stream is then unusable.
  std::optional<Message> next();
  std::size_t buffered() const { return buf_.size() - head_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t head_ = 0;
};

/// Structured multi-line rendering of a frame ("wire-dump").
std::string dump(const Message& msg);

}  // namespace ranslice::wire
