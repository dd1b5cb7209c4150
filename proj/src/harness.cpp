#include "psd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <queue>
#include <thread>

#include "psd/adversary.hpp"
#include "psd/errors.hpp"
#include "psd/geometry.hpp"
#include "psd/protocol.hpp"

namespace psd::harness {

namespace {

constexpr std::uint64_t kTableStream = 0x7461626cull;  // table generation
constexpr std::uint64_t kTrialStream = 0x747269616cull;

constexpr double kCi95Z = 1.959964;

// snr_db is the per-bit Eb/N0 at the receiver. With unit symbol energy,
// Eb = 1/bits_per_symbol and the per-dimension noise variance is N0/2.
double noise_variance_for_snr_db(double snr_db, unsigned bits_per_symbol) {
  if (std::isinf(snr_db)) return 0.0;
  return 0.5 * std::pow(10.0, -snr_db / 10.0) /
         static_cast<double>(bits_per_symbol);
}

// 6 dB/tap decaying power-delay profile behind a fixed first tap, then
// normalized to unit energy.
std::vector<cplx> draw_taps(int channel_order, Rng& rng) {
  std::vector<cplx> taps(static_cast<std::size_t>(channel_order) + 1);
  taps[0] = 1.0;
  for (int k = 1; k <= channel_order; ++k) {
    const double sigma = std::sqrt(std::pow(10.0, -0.6 * k) / 2.0);
    const double re = sigma * rng.gaussian();
    const double im = sigma * rng.gaussian();
    taps[static_cast<std::size_t>(k)] = cplx(re, im);
  }
  double energy = 0.0;
  for (const cplx& t : taps) energy += std::norm(t);
  const double inv = 1.0 / std::sqrt(energy);
  for (cplx& t : taps) t *= inv;
  return taps;
}

struct Link {
  std::vector<cplx> taps;
  geometry::RadioLink radio;
  double distance_m = 0.0;
  double expected_rss_dbm = 0.0;
};

struct Event {
  double time = 0.0;
  long seq = 0;
  bool decide = false;  // UE verification deadline instead of a delivery
  protocol::NodeId to = protocol::NodeId::Ue;
  protocol::Message msg;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

bool carries_symbols(const protocol::Payload& p) {
  return std::holds_alternative<protocol::PrecheckForward>(p) ||
         std::holds_alternative<protocol::UlAllocation>(p);
}

}  // namespace

TrialOutcome run_trial(const ScenarioConfig& cfg, long trial_index) {
  TrialOutcome out;
  const auto mod = phy::Modulation::qam(cfg.modulation_order);

  Rng table_rng = Rng::from_stream(cfg.seed, kTableStream);
  const auto table =
      seqtable::generate_table(cfg.table_length, mod, table_rng);

  Rng rng(Rng::mix(Rng::mix(cfg.seed, kTrialStream),
                   static_cast<std::uint64_t>(trial_index)));

  const geometry::RadioLink bs_link{cfg.tx_power_dbm, cfg.path_loss_exponent,
                                    cfg.ref_loss_db, cfg.shadowing_sigma_db};
  const geometry::DeploymentConfig geo{cfg.cell_radius_m, cfg.junction_band_lo,
                                       cfg.junction_band_hi,
                                       cfg.fbs_annulus_rmin_m,
                                       cfg.fbs_annulus_rmax_m};

  // Trials model handover attempts: resample the deployment until the
  // measurement report actually triggers one.
  geometry::Deployment dep;
  double rss_source = 0.0, rss_target = 0.0;
  bool triggered = false;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    dep = geometry::sample_deployment(geo, rng);
    rss_source = geometry::rss_dbm(bs_link, dep.d_ue_lbs1(), rng);
    rss_target = geometry::rss_dbm(bs_link, dep.d_ue_lbs2(), rng);
    if (rss_target >= rss_source + cfg.hysteresis_db) {
      triggered = true;
      break;
    }
  }
  if (!triggered) {
    out.error = true;
    return out;
  }
  out.rss_source_dbm = rss_source;
  out.rss_target_dbm = rss_target;

  const adversary::FbsStrategy strategy{
      adversary::parse_power_policy(cfg.fbs_power_policy),
      cfg.fbs_power_dbm,
      cfg.fbs_max_power_dbm,
      cfg.fbs_reaction_delay_us * 1e-6,
      cfg.fbs_timing_offset_us * 1e-6,
      cfg.fbs_oracle_start};

  // Per-link channels. The configured snr_db is the per-bit Eb/N0 of the two
  // legitimate downlinks; the FBS link derives its SNR from its RSS at the
  // UE relative to the target's, so a louder forgery is also a cleaner one
  // and a weak transmitter pays in bit errors.
  const double exp_rss_target =
      geometry::expected_rss_dbm(bs_link, dep.d_ue_lbs2());

  Link source{draw_taps(cfg.channel_order, rng), bs_link, dep.d_ue_lbs1(),
              geometry::expected_rss_dbm(bs_link, dep.d_ue_lbs1())};
  Link target{draw_taps(cfg.channel_order, rng), bs_link, dep.d_ue_lbs2(),
              exp_rss_target};

  const adversary::PowerResult fbs_power =
      adversary::fbs_transmit_power(strategy, dep, bs_link);
  out.fbs_tx_power_dbm = fbs_power.dbm;
  out.fbs_power_clamped = fbs_power.clamped;
  const geometry::RadioLink fbs_radio{fbs_power.dbm, cfg.path_loss_exponent,
                                      cfg.ref_loss_db,
                                      cfg.shadowing_sigma_db};
  // A matched transmitter produces, by definition, the target's expected RSS
  // at the UE; carry that value forward instead of recomputing it through
  // the path-loss round trip, which would wobble the exact equality by ulps.
  const bool matched =
      strategy.power_policy == adversary::PowerPolicy::MatchTargetAtUe &&
      !fbs_power.clamped;
  Link fbs{draw_taps(cfg.channel_order, rng), fbs_radio, dep.d_ue_fbs(),
           matched ? exp_rss_target
                   : geometry::expected_rss_dbm(fbs_radio, dep.d_ue_fbs())};

  const double legit_noise =
      noise_variance_for_snr_db(cfg.snr_db, mod.bits_per_symbol());
  const double fbs_noise = noise_variance_for_snr_db(
      cfg.snr_db + (fbs.expected_rss_dbm - exp_rss_target),
      mod.bits_per_symbol());
  auto link_noise = [&](const Link& l) {
    return &l == &fbs ? fbs_noise : legit_noise;
  };
  auto realized_rss = [&](const Link& l) {
    double v = l.expected_rss_dbm;
    if (l.radio.shadowing_sigma_db > 0.0)
      v += l.radio.shadowing_sigma_db * rng.gaussian();
    return v;
  };

  auto make_channel = [&](const Link& l, double nv) {
    phy::ChannelModel ch;
    ch.taps = l.taps;
    ch.block_size = cfg.block_size;
    ch.noise_variance = nv;
    return ch;
  };
  const phy::Equalizer eq_source(make_channel(source, 0.0));
  const phy::Equalizer eq_target(make_channel(target, 0.0));
  const phy::Equalizer eq_fbs(make_channel(fbs, 0.0));

  // agents
  protocol::UeAgent ue(1, {&mod, dep.d_ue_lbs2(),
                           cfg.processing_delay_us * 1e-6,
                           cfg.slack_us * 1e-6, &rng});
  protocol::SourceBsAgent source_bs(&table, cfg.hysteresis_db,
                                    cfg.regular_info_len);
  protocol::TargetBsAgent target_bs(&table, cfg.seq_length,
                                    cfg.processing_delay_us * 1e-6,
                                    cfg.regular_info_len, &rng);
  adversary::FbsAgent fbs_agent(&strategy, &table, cfg.seq_length,
                                cfg.regular_info_len, &rng);

  auto node_pos = [&](protocol::NodeId id) {
    switch (id) {
      case protocol::NodeId::Ue: return dep.ue;
      case protocol::NodeId::SourceBs: return dep.lbs1;
      case protocol::NodeId::TargetBs: return dep.lbs2;
      case protocol::NodeId::Fbs: return dep.fbs;
    }
    return dep.ue;
  };
  auto prop = [&](protocol::NodeId a, protocol::NodeId b) {
    return geometry::propagation_delay_s(
        geometry::dist(node_pos(a), node_pos(b)));
  };

  std::priority_queue<Event, std::vector<Event>, EventLater> queue;
  long seq = 0;
  auto push_message = [&](protocol::Outgoing o, double now) {
    Event ev;
    ev.time = std::max(now, o.earliest_send_s);
    o.msg.send_time_s = ev.time;
    ev.time += prop(o.msg.sender, o.to);
    ev.seq = seq++;
    ev.to = o.to;
    ev.msg = std::move(o.msg);
    queue.push(std::move(ev));
  };

  // kick off: measurement report at t = 0
  for (auto& o : ue.start_measurement(
           protocol::MeasurementReport{1, rss_source, rss_target}, 0.0))
    push_message(std::move(o), 0.0);

  char trace_line[160];
  auto record_trace = [&](const Event& ev) {
    if (!cfg.trace) return;
    std::snprintf(trace_line, sizeof trace_line, "%.3f,%s,%s,%s",
                  ev.time * 1e6, protocol::node_name(ev.msg.sender),
                  protocol::node_name(ev.to),
                  protocol::kind_name(ev.msg.payload));
    out.trace.emplace_back(trace_line);
  };

  bool decided = false;
  int processed = 0;
  while (!queue.empty()) {
    if (++processed > cfg.event_budget) {
      out.error = true;
      return out;
    }
    Event ev = queue.top();
    queue.pop();

    if (ev.decide) {
      if (ue.phase() != protocol::UePhase::AwaitingUlAlloc) continue;
      detectors::DetectorContext ctx;
      ctx.kind = cfg.detector;
      ctx.standard_precheck = &ue.standard_precheck();
      ctx.window = ue.window();
      ctx.ber_accept_threshold = cfg.ber_accept_threshold;
      ctx.rng = &rng;
      ctx.claimed_link = bs_link;
      ctx.known_target_distance_m = dep.d_ue_lbs2();
      ctx.distance_threshold_m = cfg.distance_threshold_m;
      ctx.expected_rss_dbm = exp_rss_target;
      ctx.alpha = cfg.region_alpha;
      ctx.shadowing_sigma_db = cfg.shadowing_sigma_db;
      if (cfg.detector == detectors::DetectorKind::Rss3Sigma) {
        // Warm-up history of honest target measurements. Statistics are
        // computed on data shifted by the first sample so a constant history
        // (zero shadowing) yields an exact mean and exactly zero spread.
        std::vector<double> samples(
            static_cast<std::size_t>(cfg.warmup_samples));
        for (double& s : samples)
          s = geometry::rss_dbm(bs_link, dep.d_ue_lbs2(), rng);
        const double base = samples.front();
        double sum = 0.0;
        for (double s : samples) sum += s - base;
        const double n = static_cast<double>(samples.size());
        const double shifted_mean = sum / n;
        ctx.history_mean_dbm = base + shifted_mean;
        double ss = 0.0;
        for (double s : samples) {
          const double d = (s - base) - shifted_mean;
          ss += d * d;
        }
        ctx.history_std_db = std::sqrt(ss / (n - 1.0));
      }
      const detectors::Verdict verdict = ue.decide(ctx);
      out.outcome = verdict.outcome;
      out.tie = verdict.used_tie_break;
      decided = true;
      break;
    }

    record_trace(ev);

    const double now = ev.time;
    std::vector<protocol::Outgoing> outs;
    switch (ev.to) {
      case protocol::NodeId::SourceBs:
        outs = source_bs.on_delivery({std::move(ev.msg), now, {}}, now);
        break;
      case protocol::NodeId::TargetBs:
        outs = target_bs.on_delivery({std::move(ev.msg), now, {}}, now);
        break;
      case protocol::NodeId::Fbs: {
        if (std::holds_alternative<protocol::SyncRequest>(ev.msg.payload)) {
          const double legit_arrival = ev.msg.send_time_s +
                                       2.0 * prop(protocol::NodeId::Ue,
                                                  protocol::NodeId::TargetBs) +
                                       cfg.processing_delay_us * 1e-6;
          auto forged = fbs_agent.on_sync_overheard(
              now, legit_arrival, prop(protocol::NodeId::Fbs,
                                       protocol::NodeId::Ue),
              target_bs.phase() == protocol::TargetPhase::Idle
                  ? std::nullopt
                  : std::optional<std::size_t>(
                        target_bs.selection().start_index));
          if (forged) {
            out.fbs_fired = true;
            out.fbs_guess = fbs_agent.guessed_start();
            push_message(std::move(*forged), now);
          }
        }
        break;
      }
      case protocol::NodeId::Ue: {
        protocol::ReceptionInfo rx;
        phy::ChannelModel ch;
        if (carries_symbols(ev.msg.payload)) {
          const Link* l = nullptr;
          const phy::Equalizer* eq = nullptr;
          switch (ev.msg.sender) {
            case protocol::NodeId::SourceBs: l = &source; eq = &eq_source; break;
            case protocol::NodeId::TargetBs: l = &target; eq = &eq_target; break;
            case protocol::NodeId::Fbs: l = &fbs; eq = &eq_fbs; break;
            default: break;
          }
          if (l != nullptr) {
            rx.rss_dbm = realized_rss(*l);
            ch = make_channel(*l, link_noise(*l));
            rx.channel = &ch;
            rx.equalizer = eq;
          }
        }
        const bool had_window = ue.has_window();
        outs = ue.on_delivery({std::move(ev.msg), now, rx}, now);
        if (!had_window && ue.has_window()) {
          Event d;
          d.time = ue.window().t_hi;
          d.seq = seq++;
          d.decide = true;
          queue.push(std::move(d));
        }
        break;
      }
    }
    for (auto& o : outs) {
      // the FBS wiretaps the UE's direct transmissions toward the target
      if (cfg.fbs_enabled && o.to == protocol::NodeId::TargetBs &&
          std::holds_alternative<protocol::SyncRequest>(o.msg.payload)) {
        protocol::Outgoing tap;
        tap.to = protocol::NodeId::Fbs;
        tap.msg = o.msg;
        tap.earliest_send_s = o.earliest_send_s;
        push_message(std::move(tap), now);
      }
      push_message(std::move(o), now);
    }
  }

  if (!decided) {
    out.error = true;  // the protocol never reached verification
    return out;
  }

  // diagnostics
  out.protocol_errors = ue.protocol_errors() + source_bs.protocol_errors() +
                        target_bs.protocol_errors();
  out.true_start = target_bs.selection().start_index;
  const double center = 0.5 * (ue.window().t_lo + ue.window().t_hi);
  for (const auto& cand : ue.candidates()) {
    const double offset_us = (cand.arrival_time_s - center) * 1e6;
    double b = std::numeric_limits<double>::quiet_NaN();
    if (!ue.standard_precheck().empty() &&
        cand.demodulated_precheck.size() == ue.standard_precheck().size())
      b = phy::ber(cand.demodulated_precheck, ue.standard_precheck());
    if (cand.true_origin == detectors::Origin::Fbs) {
      out.fbs_ber = b;
      out.fbs_arrival_offset_us = offset_us;
      out.rss_fbs_dbm = cand.rss_dbm;
    } else {
      out.legit_ber = b;
      out.legit_arrival_offset_us = offset_us;
    }
  }
  return out;
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "snr") return SweepAxis::Snr;
  if (name == "fbs_power") return SweepAxis::FbsPower;
  if (name == "table_length") return SweepAxis::TableLength;
  if (name == "seq_length") return SweepAxis::SeqLength;
  throw ConfigError("axis: unknown sweep axis '" + std::string(name) +
                    "' (expected snr, fbs_power, table_length or seq_length)");
}

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Snr: return "snr";
    case SweepAxis::FbsPower: return "fbs_power";
    case SweepAxis::TableLength: return "table_length";
    case SweepAxis::SeqLength: return "seq_length";
  }
  return "?";
}

namespace {

ScenarioConfig config_at(const ScenarioConfig& base, SweepAxis axis,
                         double value) {
  ScenarioConfig cfg = base;
  switch (axis) {
    case SweepAxis::Snr:
      cfg.snr_db = value;
      break;
    case SweepAxis::FbsPower:
      cfg.fbs_power_policy = "sweep";
      cfg.fbs_power_dbm = value;
      break;
    case SweepAxis::TableLength:
      cfg.table_length = static_cast<std::size_t>(std::llround(value));
      break;
    case SweepAxis::SeqLength:
      cfg.seq_length = static_cast<std::size_t>(std::llround(value));
      break;
  }
  cfg.validate();
  return cfg;
}

struct Counts {
  long successes = 0, legit = 0, rejected = 0, errors = 0;

  void add(const TrialOutcome& o) {
    if (o.error) {
      ++errors;
      return;
    }
    switch (o.outcome) {
      case detectors::DetectionOutcome::FbsChosen: ++successes; break;
      case detectors::DetectionOutcome::LegitChosen: ++legit; break;
      case detectors::DetectionOutcome::AllRejected: ++rejected; break;
    }
  }
  void merge(const Counts& c) {
    successes += c.successes;
    legit += c.legit;
    rejected += c.rejected;
    errors += c.errors;
  }
};

Counts run_point(const ScenarioConfig& cfg) {
  int nthreads = cfg.threads > 0
                     ? cfg.threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  const long per = (cfg.trials + nthreads - 1) / nthreads;

  std::vector<Counts> partial(static_cast<std::size_t>(nthreads));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nthreads));
  std::vector<std::thread> workers;
  for (int w = 0; w < nthreads; ++w) {
    const long lo = static_cast<long>(w) * per;
    const long hi = std::min(cfg.trials, lo + per);
    if (lo >= hi) break;
    workers.emplace_back([&, w, lo, hi] {
      try {
        Counts local;
        for (long i = lo; i < hi; ++i) local.add(run_trial(cfg, i));
        partial[static_cast<std::size_t>(w)] = local;
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Counts total;
  for (const Counts& c : partial) total.merge(c);
  return total;
}

}  // namespace

std::vector<ScrEstimate> run_sweep(const ScenarioConfig& cfg, SweepAxis axis,
                                   std::span<const double> values) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  std::vector<double> ordered(values.begin(), values.end());
  std::sort(ordered.begin(), ordered.end());

  std::vector<ScrEstimate> results;
  for (const double value : ordered) {
    ScenarioConfig point;
    try {
      point = config_at(cfg, axis, value);
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "skipping %s=%g: %s\n",
                   std::string(axis_name(axis)).c_str(), value, e.what());
      continue;
    }
    const Counts counts = run_point(point);

    ScrEstimate est;
    est.scheme = detectors::detector_name(point.detector);
    est.table_len = point.table_length;
    est.seq_len = point.seq_length;
    est.snr_db = point.snr_db;
    const auto policy = adversary::parse_power_policy(point.fbs_power_policy);
    est.fbs_power_dbm = policy == adversary::PowerPolicy::MatchTargetAtUe
                            ? std::numeric_limits<double>::quiet_NaN()
                            : point.fbs_power_dbm;
    est.trials = point.trials;
    est.successes = counts.successes;
    est.legit = counts.legit;
    est.rejected = counts.rejected;
    est.errors = counts.errors;
    est.scr = static_cast<double>(counts.successes) /
              static_cast<double>(point.trials);
    const double hw = kCi95Z * std::sqrt(est.scr * (1.0 - est.scr) /
                                         static_cast<double>(point.trials));
    est.ci_lo = std::max(0.0, est.scr - hw);
    est.ci_hi = std::min(1.0, est.scr + hw);
    results.push_back(std::move(est));
  }
  return results;
}

void write_csv(std::span<const ScrEstimate> results, std::ostream& out) {
  if (results.empty()) throw ConfigError("no results to write");
  out << "scheme,table_len,seq_len,snr_db,fbs_power_dbm,trials,scr,ci95_lo,"
         "ci95_hi\n";
  char line[256];
  for (const ScrEstimate& e : results) {
    std::snprintf(line, sizeof line, "%s,%zu,%zu,%.6g,%.6g,%ld,%.6g,%.6g,%.6g\n",
                  e.scheme.c_str(), e.table_len, e.seq_len, e.snr_db,
                  e.fbs_power_dbm, e.trials, e.scr, e.ci_lo, e.ci_hi);
    out << line;
  }
}

void write_csv(std::span<const ScrEstimate> results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_csv(results, out);
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace psd::harness
