#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psd/geometry.hpp"
#include "psd/rng.hpp"
#include "psd/types.hpp"

namespace psd::detectors {

enum class Origin : std::uint8_t { Legit, Fbs };

// One received downlink response, as seen by the UE. true_origin is ground
// truth for scoring only; no detector may read it.
struct CandidateSignal {
  BitVec demodulated_precheck;
  double arrival_time_s = 0.0;
  double rss_dbm = 0.0;
  std::string_view claimed_sender;
  Origin true_origin = Origin::Legit;
};

enum class DetectionOutcome : std::uint8_t { LegitChosen, FbsChosen, AllRejected };

struct Verdict {
  std::vector<std::uint8_t> legal;     // per-candidate flag
  std::optional<std::size_t> chosen;   // always a legal candidate
  DetectionOutcome outcome = DetectionOutcome::AllRejected;
  bool used_tie_break = false;
};

struct Window {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// Precheck-sequence detection: out-of-window candidates are illegal; among
// in-window candidates the lowest BER against the standard precheck wins,
// exact ties are settled by a fair coin, and a sole in-window candidate is
// accepted only when its BER stays at or below the accept threshold.
Verdict psd_detect(std::span<const CandidateSignal> candidates,
                   const BitVec& standard_precheck, Window window,
                   double ber_accept_threshold, Rng& rng);

// A candidate is illegal when its RSS exceeds the historical mean by more
// than three standard deviations; the strongest legal candidate wins.
Verdict rss_threshold_detect(std::span<const CandidateSignal> candidates,
                             double history_mean_dbm, double history_std_db);

// A candidate is illegal when the distance explaining its RSS deviates from
// the known UE–target distance by more than the threshold, or when its RSS
// exceeds the free-space bound entirely.
Verdict distance_threshold_detect(std::span<const CandidateSignal> candidates,
                                  const geometry::RadioLink& claimed_link,
                                  double known_target_distance_m,
                                  double distance_threshold_m);

// A candidate is illegal when |RSS - expected| leaves the two-sided
// (1 - alpha) region of the shadowing distribution. With zero shadowing the
// region degenerates to 1e-9 dB.
Verdict suspicious_region_detect(std::span<const CandidateSignal> candidates,
                                 double expected_rss_dbm, double alpha,
                                 double shadowing_sigma_db);

enum class DetectorKind : std::uint8_t { Psd, Rss3Sigma, Distance, Region };

DetectorKind parse_detector(std::string_view name);
std::string_view detector_name(DetectorKind kind);

// Everything any of the four detectors may need for one decision.
struct DetectorContext {
  DetectorKind kind = DetectorKind::Psd;
  // psd
  const BitVec* standard_precheck = nullptr;
  Window window;
  double ber_accept_threshold = 0.25;
  Rng* rng = nullptr;
  // rss3sigma
  double history_mean_dbm = 0.0;
  double history_std_db = 0.0;
  // distance
  geometry::RadioLink claimed_link;
  double known_target_distance_m = 0.0;
  double distance_threshold_m = 100.0;
  // region
  double expected_rss_dbm = 0.0;
  double alpha = 0.05;
  double shadowing_sigma_db = 0.0;
};

Verdict run_detector(const DetectorContext& ctx,
                     std::span<const CandidateSignal> candidates);

// Inverse standard normal CDF (Acklam's approximation plus one Newton step).
double normal_quantile(double p);

}  // namespace psd::detectors
