#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "psd/config.hpp"
#include "psd/detectors.hpp"

namespace psd::harness {

struct TrialOutcome {
  detectors::DetectionOutcome outcome = detectors::DetectionOutcome::AllRejected;
  bool error = false;  // event budget exhausted or geometry unsatisfiable
  bool tie = false;    // PSD coin flip between equal-BER candidates

  std::size_t true_start = 0;
  std::size_t fbs_guess = 0;
  bool fbs_fired = false;
  double legit_ber = std::numeric_limits<double>::quiet_NaN();
  double fbs_ber = std::numeric_limits<double>::quiet_NaN();
  double legit_arrival_offset_us = std::numeric_limits<double>::quiet_NaN();
  double fbs_arrival_offset_us = std::numeric_limits<double>::quiet_NaN();
  double rss_source_dbm = 0.0;
  double rss_target_dbm = 0.0;
  double rss_fbs_dbm = std::numeric_limits<double>::quiet_NaN();
  double fbs_tx_power_dbm = std::numeric_limits<double>::quiet_NaN();
  bool fbs_power_clamped = false;
  int protocol_errors = 0;
  std::vector<std::string> trace;  // "time_us,sender,receiver,kind" lines
};

// One full handover attempt: deployment (conditioned on the handover
// trigger), per-link channels, the five-step protocol with the FBS active,
// one detector decision. Deterministic in (cfg.seed, trial_index).
TrialOutcome run_trial(const ScenarioConfig& cfg, long trial_index);

struct ScrEstimate {
  std::string scheme;
  std::size_t table_len = 0;
  std::size_t seq_len = 0;
  double snr_db = 0.0;
  double fbs_power_dbm = std::numeric_limits<double>::quiet_NaN();
  long trials = 0;
  long successes = 0;  // FBS chosen
  long legit = 0;      // legitimate BS chosen
  long rejected = 0;   // nothing accepted
  long errors = 0;
  double scr = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

enum class SweepAxis { Snr, FbsPower, TableLength, SeqLength };
SweepAxis parse_axis(std::string_view name);
std::string_view axis_name(SweepAxis axis);

// One estimate per axis value, ascending; invalid points are skipped with a
// note on stderr. Trials are partitioned across threads; aggregation is pure
// counting, so the result is identical for any schedule.
std::vector<ScrEstimate> run_sweep(const ScenarioConfig& cfg, SweepAxis axis,
                                   std::span<const double> values);

void write_csv(std::span<const ScrEstimate> results, std::ostream& out);
void write_csv(std::span<const ScrEstimate> results, const std::string& path);

}  // namespace psd::harness
