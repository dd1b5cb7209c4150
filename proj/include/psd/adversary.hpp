#pragma once

#include <cstdint>
#include <optional>

#include "psd/geometry.hpp"
#include "psd/protocol.hpp"
#include "psd/rng.hpp"
#include "psd/seqtable.hpp"

namespace psd::adversary {

enum class PowerPolicy : std::uint8_t { FixedDbm, MatchTargetAtUe, SweepPoint };
PowerPolicy parse_power_policy(std::string_view name);
std::string_view power_policy_name(PowerPolicy p);

struct FbsStrategy {
  PowerPolicy power_policy = PowerPolicy::MatchTargetAtUe;
  double power_dbm = 30.0;      // FixedDbm / SweepPoint value
  double max_power_dbm = 50.0;  // hardware ceiling for MatchTargetAtUe
  double reaction_delay_s = 5e-6;   // minimum overhear-to-transmit latency
  double timing_offset_s = -1e-6;   // aimed arrival offset from the legit one
  bool oracle_start = false;        // debug: attacker knows the true start
};

struct PowerResult {
  double dbm = 0.0;
  bool clamped = false;
};

// Transmit power the FBS selects. MatchTargetAtUe inverts the path-loss
// model so the expected RSS at the UE equals the target's; infeasible
// requests clamp to the ceiling.
PowerResult fbs_transmit_power(const FbsStrategy& strategy,
                               const geometry::Deployment& dep,
                               const geometry::RadioLink& bs_link);

struct Forgery {
  protocol::UlAllocation ul;
  std::size_t guessed_start = 0;
};

// Guess a start position (uniform over the table unless the oracle flag is
// set) and assemble the forged UL allocation. The sequence length is public.
Forgery fbs_react(const seqtable::SymbolTable& table, std::size_t seq_length,
                  std::size_t regular_info_len, bool oracle_start,
                  std::optional<std::size_t> true_start, Rng& rng);

// Reactive attacker: fires exactly once, on the first overheard sync.
class FbsAgent {
 public:
  FbsAgent(const FbsStrategy* strategy, const seqtable::SymbolTable* table,
           std::size_t seq_length, std::size_t regular_info_len, Rng* rng);

  // heard_time_s: when the UE's sync transmission reached the FBS.
  // legit_arrival_s: the attacker's estimate of when the genuine response
  // reaches the UE; it aims its own arrival at that time plus the configured
  // offset, no earlier than its reaction latency allows.
  std::optional<protocol::Outgoing> on_sync_overheard(
      double heard_time_s, double legit_arrival_s, double prop_to_ue_s,
      std::optional<std::size_t> true_start);

  bool fired() const { return fired_; }
  std::size_t guessed_start() const { return guessed_start_; }

 private:
  const FbsStrategy* strategy_;
  const seqtable::SymbolTable* table_;
  std::size_t seq_length_;
  std::size_t regular_info_len_;
  Rng* rng_;
  bool fired_ = false;
  std::size_t guessed_start_ = 0;
};

}  // namespace psd::adversary
