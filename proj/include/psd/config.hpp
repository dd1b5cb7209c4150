#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "psd/detectors.hpp"

namespace psd::harness {

// One Monte Carlo scenario. Field defaults are the documented defaults; the
// config file and CLI overrides both go through the same key registry.
struct ScenarioConfig {
  unsigned modulation_order = 16;
  std::size_t table_length = 32;
  std::size_t seq_length = 8;  // precheck symbols, a whole number of blocks
  int block_size = 4;
  int channel_order = 2;
  double snr_db = 40.0;  // target-link symbol SNR at the UE; inf = noise off
  detectors::DetectorKind detector = detectors::DetectorKind::Psd;
  long trials = 10000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  double hysteresis_db = 3.0;
  double processing_delay_us = 10.0;
  double slack_us = 2.0;

  double cell_radius_m = 500.0;
  double junction_band_lo = 0.8;
  double junction_band_hi = 1.2;
  double tx_power_dbm = 43.0;
  double path_loss_exponent = 3.5;
  double ref_loss_db = 30.0;
  double shadowing_sigma_db = 0.0;

  bool fbs_enabled = true;
  std::string fbs_power_policy = "match_target";  // fixed | match_target | sweep
  double fbs_power_dbm = 30.0;
  double fbs_max_power_dbm = 50.0;
  double fbs_annulus_rmin_m = 50.0;
  double fbs_annulus_rmax_m = 200.0;
  double fbs_reaction_delay_us = 5.0;
  double fbs_timing_offset_us = -1.0;
  bool fbs_oracle_start = false;

  double ber_accept_threshold = 0.25;
  double distance_threshold_m = 100.0;
  double region_alpha = 0.05;
  int warmup_samples = 200;
  std::size_t regular_info_len = 64;
  int event_budget = 10000;
  bool trace = false;

  void validate() const;  // throws ConfigError naming the offending key
};

// key=value per line, '#' comments, unknown keys rejected.
ScenarioConfig parse_config_file(const std::string& path);
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

// File (optional) first, then overrides in order; validates the result.
ScenarioConfig parse_config(const std::optional<std::string>& path,
                            std::span<const std::string> overrides);

// Every key with its resolved value, one per line.
std::string resolved_banner(const ScenarioConfig& cfg);

}  // namespace psd::harness
