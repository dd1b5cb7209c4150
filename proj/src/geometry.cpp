#include "psd/geometry.hpp"

#include <cstdio>
#include <numbers>
#include <string>

#include "psd/errors.hpp"

namespace psd::geometry {

Deployment sample_deployment(const DeploymentConfig& cfg, Rng& rng) {
  if (cfg.cell_radius_m <= 0.0)
    throw ConfigError("cell_radius_m must be > 0");
  if (!(cfg.junction_band_lo > 0.0) ||
      cfg.junction_band_lo > cfg.junction_band_hi)
    throw ConfigError("junction band must satisfy 0 < lo <= hi");
  if (!(cfg.fbs_rmin_m > 0.0) || cfg.fbs_rmin_m >= cfg.fbs_rmax_m)
    throw ConfigError("fbs annulus must satisfy 0 < rmin < rmax");

  const double r = cfg.cell_radius_m;
  Deployment d;
  d.cell_radius_m = r;
  d.fbs_rmin_m = cfg.fbs_rmin_m;
  d.fbs_rmax_m = cfg.fbs_rmax_m;
  d.lbs1 = {0.0, 0.0};
  d.lbs2 = {2.0 * r, 0.0};

  const double lo = cfg.junction_band_lo * r;
  const double hi = cfg.junction_band_hi * r;
  bool placed = false;
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const Vec2 ue{rng.uniform() * 2.0 * r, (2.0 * rng.uniform() - 1.0) * hi};
    const double d1 = dist(ue, d.lbs1);
    const double d2 = dist(ue, d.lbs2);
    if (d1 >= lo && d1 <= hi && d2 >= lo && d2 <= hi) {
      d.ue = ue;
      placed = true;
      break;
    }
  }
  if (!placed)
    throw ConfigError("junction band is empty for the given geometry");

  // area-uniform radius in the annulus
  const double rmin2 = cfg.fbs_rmin_m * cfg.fbs_rmin_m;
  const double rmax2 = cfg.fbs_rmax_m * cfg.fbs_rmax_m;
  const double radius = std::sqrt(rmin2 + rng.uniform() * (rmax2 - rmin2));
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  d.fbs = {d.ue.x + radius * std::cos(theta), d.ue.y + radius * std::sin(theta)};
  return d;
}

double path_loss_db(const RadioLink& link, double distance_m) {
  if (distance_m < kReferenceDistanceM) {
    std::fprintf(stderr,
                 "warning: distance %.3g m below the %.0f m reference, "
                 "clamping\n",
                 distance_m, kReferenceDistanceM);
    distance_m = kReferenceDistanceM;
  }
  return link.ref_loss_db + 10.0 * link.path_loss_exponent *
                                std::log10(distance_m / kReferenceDistanceM);
}

double expected_rss_dbm(const RadioLink& link, double distance_m) {
  return link.tx_power_dbm - path_loss_db(link, distance_m);
}

double rss_dbm(const RadioLink& link, double distance_m, Rng& rng) {
  double v = expected_rss_dbm(link, distance_m);
  if (link.shadowing_sigma_db > 0.0)
    v += link.shadowing_sigma_db * rng.gaussian();
  return v;
}

double invert_distance_m(const RadioLink& link, double rss_dbm_value) {
  const double loss = link.tx_power_dbm - rss_dbm_value;
  return kReferenceDistanceM *
         std::pow(10.0, (loss - link.ref_loss_db) /
                            (10.0 * link.path_loss_exponent));
}

double propagation_delay_s(double distance_m) {
  if (distance_m < 0.0) throw ConfigError("distance must be >= 0");
  return distance_m / kSpeedOfLight;
}

}  // namespace psd::geometry
