#include "psd/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "psd/errors.hpp"
#include "psd/phy.hpp"

namespace psd::detectors {

namespace {

DetectionOutcome outcome_for(std::span<const CandidateSignal> candidates,
                             const std::optional<std::size_t>& chosen) {
  if (!chosen) return DetectionOutcome::AllRejected;
  return candidates[*chosen].true_origin == Origin::Fbs
             ? DetectionOutcome::FbsChosen
             : DetectionOutcome::LegitChosen;
}

// Strongest legal candidate; equal RSS resolves to the earlier arrival, and
// a residual tie keeps the first-listed candidate.
void choose_strongest_legal(std::span<const CandidateSignal> candidates,
                            Verdict& v) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!v.legal[i]) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& cur = candidates[i];
    const auto& top = candidates[*best];
    if (cur.rss_dbm > top.rss_dbm ||
        (cur.rss_dbm == top.rss_dbm && cur.arrival_time_s < top.arrival_time_s))
      best = i;
  }
  v.chosen = best;
  v.outcome = outcome_for(candidates, best);
}

}  // namespace

Verdict psd_detect(std::span<const CandidateSignal> candidates,
                   const BitVec& standard_precheck, Window window,
                   double ber_accept_threshold, Rng& rng) {
  if (standard_precheck.empty())
    throw ComparisonError("standard precheck sequence is empty");
  Verdict v;
  v.legal.assign(candidates.size(), 0);
  if (candidates.empty()) return v;

  // Legal means: inside the anticipated window and a precheck that did not
  // fail outright (BER at or below the accept threshold). The lowest BER
  // among legal candidates wins; an exact tie is settled by a fair coin.
  std::vector<std::size_t> legal_idx;
  std::vector<double> bit_error;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double t = candidates[i].arrival_time_s;
    if (t < window.t_lo || t > window.t_hi) continue;
    const double b =
        phy::ber(candidates[i].demodulated_precheck, standard_precheck);
    if (b > ber_accept_threshold) continue;
    v.legal[i] = 1;
    legal_idx.push_back(i);
    bit_error.push_back(b);
  }
  if (legal_idx.empty()) {
    v.outcome = DetectionOutcome::AllRejected;
    return v;
  }

  // Among the acceptable candidates, the one with higher BER is regarded as
  // illegal; only the minimum (and its exact ties) keeps the legal flag.
  const double min_ber = *std::min_element(bit_error.begin(), bit_error.end());
  std::vector<std::size_t> tied;
  for (std::size_t k = 0; k < legal_idx.size(); ++k) {
    if (bit_error[k] == min_ber)
      tied.push_back(legal_idx[k]);
    else
      v.legal[legal_idx[k]] = 0;
  }
  if (tied.size() == 1) {
    v.chosen = tied.front();
  } else {
    v.chosen = tied[rng.uniform_int(tied.size())];
    v.used_tie_break = true;
  }
  v.outcome = outcome_for(candidates, v.chosen);
  return v;
}

Verdict rss_threshold_detect(std::span<const CandidateSignal> candidates,
                             double history_mean_dbm, double history_std_db) {
  if (history_std_db < 0.0)
    throw ConfigError("history std must be >= 0 dB");
  Verdict v;
  v.legal.assign(candidates.size(), 0);
  const double limit = history_mean_dbm + 3.0 * history_std_db;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    v.legal[i] = candidates[i].rss_dbm <= limit;
  choose_strongest_legal(candidates, v);
  return v;
}

Verdict distance_threshold_detect(std::span<const CandidateSignal> candidates,
                                  const geometry::RadioLink& claimed_link,
                                  double known_target_distance_m,
                                  double distance_threshold_m) {
  if (!(distance_threshold_m > 0.0))
    throw ConfigError("distance threshold must be > 0 m");
  Verdict v;
  v.legal.assign(candidates.size(), 0);
  const double free_space_bound =
      claimed_link.tx_power_dbm - claimed_link.ref_loss_db;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double rss = candidates[i].rss_dbm;
    if (rss > free_space_bound) continue;  // closer than the model allows
    const double est = geometry::invert_distance_m(claimed_link, rss);
    v.legal[i] = std::abs(est - known_target_distance_m) <= distance_threshold_m;
  }
  choose_strongest_legal(candidates, v);
  return v;
}

Verdict suspicious_region_detect(std::span<const CandidateSignal> candidates,
                                 double expected_rss_dbm, double alpha,
                                 double shadowing_sigma_db) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("region alpha must be in (0, 1)");
  if (shadowing_sigma_db < 0.0)
    throw ConfigError("shadowing sigma must be >= 0 dB");
  const double half_width =
      std::max(normal_quantile(1.0 - alpha / 2.0) * shadowing_sigma_db, 1e-9);
  Verdict v;
  v.legal.assign(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    v.legal[i] = std::abs(candidates[i].rss_dbm - expected_rss_dbm) <= half_width;
  choose_strongest_legal(candidates, v);
  return v;
}

DetectorKind parse_detector(std::string_view name) {
  if (name == "psd") return DetectorKind::Psd;
  if (name == "rss3sigma") return DetectorKind::Rss3Sigma;
  if (name == "distance") return DetectorKind::Distance;
  if (name == "region") return DetectorKind::Region;
  throw ConfigError("detector: unknown scheme '" + std::string(name) +
                    "' (expected psd, rss3sigma, distance or region)");
}

std::string_view detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Psd: return "psd";
    case DetectorKind::Rss3Sigma: return "rss3sigma";
    case DetectorKind::Distance: return "distance";
    case DetectorKind::Region: return "region";
  }
  return "?";
}

Verdict run_detector(const DetectorContext& ctx,
                     std::span<const CandidateSignal> candidates) {
  switch (ctx.kind) {
    case DetectorKind::Psd:
      return psd_detect(candidates, *ctx.standard_precheck, ctx.window,
                        ctx.ber_accept_threshold, *ctx.rng);
    case DetectorKind::Rss3Sigma:
      return rss_threshold_detect(candidates, ctx.history_mean_dbm,
                                  ctx.history_std_db);
    case DetectorKind::Distance:
      return distance_threshold_detect(candidates, ctx.claimed_link,
                                       ctx.known_target_distance_m,
                                       ctx.distance_threshold_m);
    case DetectorKind::Region:
      return suspicious_region_detect(candidates, ctx.expected_rss_dbm,
                                      ctx.alpha, ctx.shadowing_sigma_db);
  }
  throw ConfigError("invalid detector kind");
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ConfigError("normal quantile needs p in (0, 1)");
  // Acklam's rational approximation
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Newton step against the exact CDF
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace psd::detectors
