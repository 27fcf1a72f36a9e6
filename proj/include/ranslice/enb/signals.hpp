#pragma once

// Abstract UE <-> eNB <-> EPC signalling. Only the fields the admission
// pipeline needs are carried; no RRC/S1AP/NAS encoding.

#include <cstdint>
#include <string>
#include <vector>

#include "ranslice/common/ids.hpp"
#include "ranslice/policy/template.hpp"

namespace ranslice::enb {

enum class Signal : std::uint8_t {
  RRCConnectionRequest,
  RRCConnectionSetup,
  RRCConnectionSetupComplete,
  RRCConnectionReconfiguration,
  RRCConnectionReconfigurationComplete,
  RRCConnectionRelease,
  InitialUEMessage,
  InitialContextSetupRequest,
  InitialContextSetupResponse,
  InitialContextSetupFailure,
  UEContextReleaseRequest,
  UEContextReleaseCommand,
  UEContextReleaseComplete,
};

std::string to_string(Signal s);

/// Sim-level handle of a UE, used before an RNTI exists.
using UeHandle = std::uint32_t;

struct SignalMsg {
  Signal signal = Signal::RRCConnectionRequest;
  UeHandle ue = 0;
  EnbId enb_id = 0;
  CellId cell_id = 0;
  Rnti rnti = 0;
  NasId nas_id;
  /// E-RABs requested by the EPC (InitialContextSetupRequest) or set up
  /// towards the UE (RRCConnectionReconfiguration).
  std::vector<policy::DrbRequest> drbs;
  std::string cause;
};

/// Every hop and processing step the latency model can delay.
enum class Step : std::uint8_t {
  AirLink,
  S1Link,
  ControlLink,
  EnbRrcProc,
  UeRrcProc,
  EpcAttachProc,
  EnbLocalAcProc,
  ControllerAcProc,
  EnbCentralAcceptProc,
  EnbContextSetupProc,
  UeReconfigProc,
  EpcReleaseProc,
};

inline constexpr std::size_t kStepCount = 12;

std::string to_string(Step s);

}  // namespace ranslice::enb
