#include "psd/adversary.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "psd/errors.hpp"

namespace psd::adversary {

PowerPolicy parse_power_policy(std::string_view name) {
  if (name == "fixed") return PowerPolicy::FixedDbm;
  if (name == "match_target") return PowerPolicy::MatchTargetAtUe;
  if (name == "sweep") return PowerPolicy::SweepPoint;
  throw ConfigError("fbs.power_policy: unknown policy '" + std::string(name) +
                    "' (expected fixed, match_target or sweep)");
}

std::string_view power_policy_name(PowerPolicy p) {
  switch (p) {
    case PowerPolicy::FixedDbm: return "fixed";
    case PowerPolicy::MatchTargetAtUe: return "match_target";
    case PowerPolicy::SweepPoint: return "sweep";
  }
  return "?";
}

PowerResult fbs_transmit_power(const FbsStrategy& strategy,
                               const geometry::Deployment& dep,
                               const geometry::RadioLink& bs_link) {
  switch (strategy.power_policy) {
    case PowerPolicy::FixedDbm:
    case PowerPolicy::SweepPoint:
      return {strategy.power_dbm, false};
    case PowerPolicy::MatchTargetAtUe: {
      const double wanted = bs_link.tx_power_dbm -
                            geometry::path_loss_db(bs_link, dep.d_ue_lbs2()) +
                            geometry::path_loss_db(bs_link, dep.d_ue_fbs());
      if (wanted > strategy.max_power_dbm) {
        std::fprintf(stderr,
                     "warning: match_target needs %.1f dBm, clamping to "
                     "%.1f dBm\n",
                     wanted, strategy.max_power_dbm);
        return {strategy.max_power_dbm, true};
      }
      return {wanted, false};
    }
  }
  throw ConfigError("invalid fbs power policy");
}

Forgery fbs_react(const seqtable::SymbolTable& table, std::size_t seq_length,
                  std::size_t regular_info_len, bool oracle_start,
                  std::optional<std::size_t> true_start, Rng& rng) {
  std::size_t guess;
  if (oracle_start && true_start) {
    guess = *true_start;
  } else {
    guess = rng.uniform_int(table.size());
  }
  Forgery f;
  f.guessed_start = guess;
  f.ul.precheck_symbols = seqtable::select_precheck(table, {guess, seq_length});
  f.ul.regular_info_len = regular_info_len;  // replicates the genuine format
  return f;
}

FbsAgent::FbsAgent(const FbsStrategy* strategy,
                   const seqtable::SymbolTable* table, std::size_t seq_length,
                   std::size_t regular_info_len, Rng* rng)
    : strategy_(strategy),
      table_(table),
      seq_length_(seq_length),
      regular_info_len_(regular_info_len),
      rng_(rng) {
  if (!(strategy->reaction_delay_s > 0.0))
    throw ConfigError("fbs.reaction_delay_us must be > 0");
}

std::optional<protocol::Outgoing> FbsAgent::on_sync_overheard(
    double heard_time_s, double legit_arrival_s, double prop_to_ue_s,
    std::optional<std::size_t> true_start) {
  if (fired_) return std::nullopt;  // one forgery per handover attempt
  fired_ = true;

  Forgery f = fbs_react(*table_, seq_length_, regular_info_len_,
                        strategy_->oracle_start, true_start, *rng_);
  guessed_start_ = f.guessed_start;

  const double aimed_tx =
      legit_arrival_s + strategy_->timing_offset_s - prop_to_ue_s;
  const double tx_time =
      std::max(aimed_tx, heard_time_s + strategy_->reaction_delay_s);

  protocol::Message m;
  m.send_time_s = tx_time;
  m.sender = protocol::NodeId::Fbs;
  m.claimed_sender = protocol::NodeId::TargetBs;  // spoofed identity
  m.payload = std::move(f.ul);
  return protocol::Outgoing{protocol::NodeId::Ue, std::move(m), tx_time};
}

}  // namespace psd::adversary
