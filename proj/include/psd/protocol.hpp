#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "psd/detectors.hpp"
#include "psd/phy.hpp"
#include "psd/rng.hpp"
#include "psd/seqtable.hpp"
#include "psd/types.hpp"

namespace psd::protocol {

enum class NodeId : std::uint8_t { Ue, SourceBs, TargetBs, Fbs };
const char* node_name(NodeId id);

struct MeasurementReport {
  int ue_id = 0;
  double rss_source_dbm = 0.0;
  double rss_target_dbm = 0.0;
};
struct HandoverRequest {
  int ue_id = 0;
};
struct HandoverRequestAck {
  std::size_t start_index = 0;
  std::size_t seq_length = 0;
  std::size_t regular_info_len = 0;
};
struct PrecheckForward {
  std::vector<cplx> precheck_symbols;
  std::size_t regular_info_len = 0;
};
struct SyncRequest {
  int ue_id = 0;
};
struct UlAllocation {
  std::vector<cplx> precheck_symbols;
  std::size_t regular_info_len = 0;
};

using Payload = std::variant<MeasurementReport, HandoverRequest,
                             HandoverRequestAck, PrecheckForward, SyncRequest,
                             UlAllocation>;
const char* kind_name(const Payload& p);

struct Message {
  double send_time_s = 0.0;
  NodeId sender = NodeId::Ue;          // physical transmitter
  NodeId claimed_sender = NodeId::Ue;  // identity the frame claims
  Payload payload;
};

struct Outgoing {
  NodeId to = NodeId::Ue;
  Message msg;
  double earliest_send_s = 0.0;  // accounts for processing delay
};

// Physical reception context for symbol-bearing payloads.
struct ReceptionInfo {
  double rss_dbm = 0.0;
  const phy::ChannelModel* channel = nullptr;
  const phy::Equalizer* equalizer = nullptr;
};

struct Delivery {
  Message msg;
  double arrival_time_s = 0.0;
  ReceptionInfo rx;
};

// Anticipated arrival window for the target's response: the sync round trip
// plus the target's processing delay, widened by ±slack.
detectors::Window expected_window(double sync_send_time_s, double distance_m,
                                  double processing_delay_s, double slack_s);

enum class UePhase : std::uint8_t {
  Connected,
  AwaitingAck,
  AwaitingUlAlloc,
  Verifying,
  HandedOver,
  AttackDetected,
  CheatSucceeded,
};
const char* phase_name(UePhase p);

class UeAgent {
 public:
  struct Context {
    const phy::Modulation* mod = nullptr;
    double distance_to_target_m = 0.0;
    double processing_delay_s = 0.0;
    double slack_s = 0.0;
    Rng* rng = nullptr;  // reception noise
  };

  UeAgent(int ue_id, Context ctx);

  // Connected → AwaitingAck; emits the measurement report.
  std::vector<Outgoing> start_measurement(const MeasurementReport& mr,
                                          double now);
  std::vector<Outgoing> on_delivery(const Delivery& d, double now);

  // Runs the configured detector over the collected candidates and enters a
  // terminal phase. Valid only in AwaitingUlAlloc (at window close).
  detectors::Verdict decide(const detectors::DetectorContext& ctx);

  UePhase phase() const { return phase_; }
  const std::vector<UePhase>& phase_history() const { return history_; }
  const BitVec& standard_precheck() const { return standard_precheck_; }
  detectors::Window window() const { return window_; }
  double sync_time_s() const { return sync_time_s_; }
  bool has_window() const { return has_window_; }
  const std::vector<detectors::CandidateSignal>& candidates() const {
    return candidates_;
  }
  int protocol_errors() const { return protocol_errors_; }

 private:
  void enter(UePhase p);

  int ue_id_;
  Context ctx_;
  UePhase phase_ = UePhase::Connected;
  std::vector<UePhase> history_{UePhase::Connected};
  BitVec standard_precheck_;
  detectors::Window window_{};
  bool has_window_ = false;
  double sync_time_s_ = 0.0;
  std::vector<detectors::CandidateSignal> candidates_;
  int protocol_errors_ = 0;
};

enum class SourcePhase : std::uint8_t { Idle, AwaitingAck, Forwarded };

class SourceBsAgent {
 public:
  SourceBsAgent(const seqtable::SymbolTable* table, double hysteresis_db,
                std::size_t regular_info_len);

  std::vector<Outgoing> on_delivery(const Delivery& d, double now);

  SourcePhase phase() const { return phase_; }
  int protocol_errors() const { return protocol_errors_; }

 private:
  const seqtable::SymbolTable* table_;
  double hysteresis_db_;
  std::size_t regular_info_len_;
  SourcePhase phase_ = SourcePhase::Idle;
  int ue_id_ = 0;
  int protocol_errors_ = 0;
};

enum class TargetPhase : std::uint8_t { Idle, Prepared, Responded };

class TargetBsAgent {
 public:
  TargetBsAgent(const seqtable::SymbolTable* table, std::size_t seq_length,
                double processing_delay_s, std::size_t regular_info_len,
                Rng* rng);

  std::vector<Outgoing> on_delivery(const Delivery& d, double now);

  TargetPhase phase() const { return phase_; }
  const seqtable::PrecheckSelection& selection() const { return selection_; }
  int protocol_errors() const { return protocol_errors_; }

 private:
  const seqtable::SymbolTable* table_;
  std::size_t seq_length_;
  double processing_delay_s_;
  std::size_t regular_info_len_;
  Rng* rng_;
  TargetPhase phase_ = TargetPhase::Idle;
  seqtable::PrecheckSelection selection_{};
  std::optional<int> ue_id_;
  int protocol_errors_ = 0;
};

}  // namespace psd::protocol
