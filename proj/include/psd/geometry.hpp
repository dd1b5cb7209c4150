#pragma once

#include <cmath>

#include "psd/rng.hpp"

namespace psd::geometry {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s
inline constexpr double kReferenceDistanceM = 1.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(Vec2 a, Vec2 b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct DeploymentConfig {
  double cell_radius_m = 500.0;
  double junction_band_lo = 0.8;  // UE distance band, fraction of cell radius
  double junction_band_hi = 1.2;
  double fbs_rmin_m = 50.0;  // annulus around the UE
  double fbs_rmax_m = 200.0;
};

// Source and target base stations sit at the centers of two adjacent cells
// (2R apart); the UE lies in the junction band of both; the FBS is placed
// area-uniformly in an annulus around the UE.
struct Deployment {
  Vec2 lbs1, lbs2, ue, fbs;
  double cell_radius_m = 0.0;
  double fbs_rmin_m = 0.0;
  double fbs_rmax_m = 0.0;

  double d_ue_lbs1() const { return dist(ue, lbs1); }
  double d_ue_lbs2() const { return dist(ue, lbs2); }
  double d_ue_fbs() const { return dist(ue, fbs); }
};

Deployment sample_deployment(const DeploymentConfig& cfg, Rng& rng);

// Log-distance path loss with optional log-normal shadowing,
// referenced to 1 m.
struct RadioLink {
  double tx_power_dbm = 43.0;
  double path_loss_exponent = 3.5;
  double ref_loss_db = 30.0;        // loss at the 1 m reference distance
  double shadowing_sigma_db = 0.0;
};

double path_loss_db(const RadioLink& link, double distance_m);
double expected_rss_dbm(const RadioLink& link, double distance_m);
double rss_dbm(const RadioLink& link, double distance_m, Rng& rng);

// Distance that explains an observed RSS under the deterministic model.
// Values above the free-space bound produce estimates below 1 m.
double invert_distance_m(const RadioLink& link, double rss_dbm_value);

double propagation_delay_s(double distance_m);

}  // namespace psd::geometry
