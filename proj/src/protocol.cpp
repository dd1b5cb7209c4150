#include "psd/protocol.hpp"

#include "psd/errors.hpp"

namespace psd::protocol {

const char* node_name(NodeId id) {
  switch (id) {
    case NodeId::Ue: return "ue";
    case NodeId::SourceBs: return "source_bs";
    case NodeId::TargetBs: return "target_bs";
    case NodeId::Fbs: return "fbs";
  }
  return "?";
}

const char* kind_name(const Payload& p) {
  struct Visitor {
    const char* operator()(const MeasurementReport&) { return "measurement_report"; }
    const char* operator()(const HandoverRequest&) { return "handover_request"; }
    const char* operator()(const HandoverRequestAck&) { return "handover_request_ack"; }
    const char* operator()(const PrecheckForward&) { return "precheck_forward"; }
    const char* operator()(const SyncRequest&) { return "sync_request"; }
    const char* operator()(const UlAllocation&) { return "ul_allocation"; }
  };
  return std::visit(Visitor{}, p);
}

const char* phase_name(UePhase p) {
  switch (p) {
    case UePhase::Connected: return "Connected";
    case UePhase::AwaitingAck: return "AwaitingAck";
    case UePhase::AwaitingUlAlloc: return "AwaitingUlAlloc";
    case UePhase::Verifying: return "Verifying";
    case UePhase::HandedOver: return "HandedOver";
    case UePhase::AttackDetected: return "AttackDetected";
    case UePhase::CheatSucceeded: return "CheatSucceeded";
  }
  return "?";
}

detectors::Window expected_window(double sync_send_time_s, double distance_m,
                                  double processing_delay_s, double slack_s) {
  if (distance_m < 0.0 || processing_delay_s < 0.0 || slack_s < 0.0)
    throw ConfigError("expected_window arguments must be >= 0");
  const double center = sync_send_time_s +
                        2.0 * geometry::propagation_delay_s(distance_m) +
                        processing_delay_s;
  return {center - slack_s, center + slack_s};
}

UeAgent::UeAgent(int ue_id, Context ctx) : ue_id_(ue_id), ctx_(ctx) {}

void UeAgent::enter(UePhase p) {
  phase_ = p;
  history_.push_back(p);
}

std::vector<Outgoing> UeAgent::start_measurement(const MeasurementReport& mr,
                                                 double now) {
  if (phase_ != UePhase::Connected) {
    ++protocol_errors_;
    return {};
  }
  enter(UePhase::AwaitingAck);
  Message m;
  m.send_time_s = now;
  m.sender = NodeId::Ue;
  m.claimed_sender = NodeId::Ue;
  m.payload = mr;
  return {Outgoing{NodeId::SourceBs, std::move(m), now}};
}

std::vector<Outgoing> UeAgent::on_delivery(const Delivery& d, double now) {
  if (const auto* fwd = std::get_if<PrecheckForward>(&d.msg.payload)) {
    if (phase_ != UePhase::AwaitingAck) {
      ++protocol_errors_;
      return {};
    }
    standard_precheck_ = phy::receive_frame(fwd->precheck_symbols, *ctx_.mod,
                                            *d.rx.channel, *d.rx.equalizer,
                                            *ctx_.rng);
    sync_time_s_ = now;
    window_ = expected_window(now, ctx_.distance_to_target_m,
                              ctx_.processing_delay_s, ctx_.slack_s);
    has_window_ = true;
    enter(UePhase::AwaitingUlAlloc);
    Message m;
    m.send_time_s = now;
    m.sender = NodeId::Ue;
    m.claimed_sender = NodeId::Ue;
    m.payload = SyncRequest{ue_id_};
    return {Outgoing{NodeId::TargetBs, std::move(m), now}};
  }

  if (const auto* ul = std::get_if<UlAllocation>(&d.msg.payload)) {
    if (phase_ != UePhase::AwaitingUlAlloc) {
      // A UL allocation before our synchronization request is impossible for
      // the genuine target; count it and drop.
      ++protocol_errors_;
      return {};
    }
    if (now > window_.t_hi) return {};  // verification already closed
    detectors::CandidateSignal cand;
    cand.demodulated_precheck = phy::receive_frame(
        ul->precheck_symbols, *ctx_.mod, *d.rx.channel, *d.rx.equalizer,
        *ctx_.rng);
    cand.arrival_time_s = now;
    cand.rss_dbm = d.rx.rss_dbm;
    cand.claimed_sender = node_name(d.msg.claimed_sender);
    cand.true_origin = d.msg.sender == NodeId::Fbs ? detectors::Origin::Fbs
                                                   : detectors::Origin::Legit;
    candidates_.push_back(std::move(cand));
    return {};
  }

  ++protocol_errors_;
  return {};
}

detectors::Verdict UeAgent::decide(const detectors::DetectorContext& ctx) {
  if (phase_ != UePhase::AwaitingUlAlloc)
    throw ConfigError("UE decide() outside AwaitingUlAlloc");
  enter(UePhase::Verifying);
  const detectors::Verdict v = detectors::run_detector(ctx, candidates_);
  switch (v.outcome) {
    case detectors::DetectionOutcome::LegitChosen:
      enter(UePhase::HandedOver);
      break;
    case detectors::DetectionOutcome::FbsChosen:
      enter(UePhase::CheatSucceeded);
      break;
    case detectors::DetectionOutcome::AllRejected:
      enter(UePhase::AttackDetected);
      break;
  }
  return v;
}

SourceBsAgent::SourceBsAgent(const seqtable::SymbolTable* table,
                             double hysteresis_db,
                             std::size_t regular_info_len)
    : table_(table),
      hysteresis_db_(hysteresis_db),
      regular_info_len_(regular_info_len) {}

std::vector<Outgoing> SourceBsAgent::on_delivery(const Delivery& d,
                                                 double now) {
  if (const auto* mr = std::get_if<MeasurementReport>(&d.msg.payload)) {
    if (phase_ != SourcePhase::Idle) {
      ++protocol_errors_;
      return {};
    }
    if (mr->rss_target_dbm < mr->rss_source_dbm + hysteresis_db_)
      return {};  // target not convincingly stronger, no handover
    ue_id_ = mr->ue_id;
    phase_ = SourcePhase::AwaitingAck;
    Message m;
    m.send_time_s = now;
    m.sender = NodeId::SourceBs;
    m.claimed_sender = NodeId::SourceBs;
    m.payload = HandoverRequest{ue_id_};
    return {Outgoing{NodeId::TargetBs, std::move(m), now}};
  }

  if (const auto* ack = std::get_if<HandoverRequestAck>(&d.msg.payload)) {
    if (phase_ != SourcePhase::AwaitingAck) {
      ++protocol_errors_;
      return {};
    }
    auto symbols = seqtable::select_precheck(
        *table_, {ack->start_index, ack->seq_length});
    phase_ = SourcePhase::Forwarded;
    Message m;
    m.send_time_s = now;
    m.sender = NodeId::SourceBs;
    m.claimed_sender = NodeId::SourceBs;
    m.payload = PrecheckForward{std::move(symbols), regular_info_len_};
    return {Outgoing{NodeId::Ue, std::move(m), now}};
  }

  ++protocol_errors_;
  return {};
}

TargetBsAgent::TargetBsAgent(const seqtable::SymbolTable* table,
                             std::size_t seq_length, double processing_delay_s,
                             std::size_t regular_info_len, Rng* rng)
    : table_(table),
      seq_length_(seq_length),
      processing_delay_s_(processing_delay_s),
      regular_info_len_(regular_info_len),
      rng_(rng) {}

std::vector<Outgoing> TargetBsAgent::on_delivery(const Delivery& d,
                                                 double now) {
  if (const auto* req = std::get_if<HandoverRequest>(&d.msg.payload)) {
    if (phase_ != TargetPhase::Idle) {
      ++protocol_errors_;
      return {};
    }
    selection_ = seqtable::random_selection(table_->size(), seq_length_, *rng_);
    ue_id_ = req->ue_id;
    phase_ = TargetPhase::Prepared;
    Message m;
    m.send_time_s = now;
    m.sender = NodeId::TargetBs;
    m.claimed_sender = NodeId::TargetBs;
    m.payload = HandoverRequestAck{selection_.start_index, selection_.length,
                                   regular_info_len_};
    return {Outgoing{NodeId::SourceBs, std::move(m), now}};
  }

  if (const auto* sync = std::get_if<SyncRequest>(&d.msg.payload)) {
    if (phase_ != TargetPhase::Prepared) {
      ++protocol_errors_;
      return {};
    }
    if (!ue_id_ || *ue_id_ != sync->ue_id) return {};  // unknown UE, ignore
    phase_ = TargetPhase::Responded;
    Message m;
    m.sender = NodeId::TargetBs;
    m.claimed_sender = NodeId::TargetBs;
    m.payload = UlAllocation{seqtable::select_precheck(*table_, selection_),
                             regular_info_len_};
    return {Outgoing{NodeId::Ue, std::move(m), now + processing_delay_s_}};
  }

  ++protocol_errors_;
  return {};
}

}  // namespace psd::protocol
