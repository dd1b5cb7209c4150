#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "psd/errors.hpp"
#include "psd/harness.hpp"

using namespace psd;
using harness::ScenarioConfig;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/psd_test_" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string csv_string(const std::vector<harness::ScrEstimate>& results) {
  std::ostringstream out;
  harness::write_csv(results, out);
  return out.str();
}

}  // namespace

TEST_CASE("config files parse, validate and echo") {
  const auto path = write_temp("cfg1",
                               "# scenario\n"
                               "table_length = 32\n"
                               "seq_length=8   # two blocks\n"
                               "detector=psd\n"
                               "fbs.power_policy=match_target\n");
  const auto cfg = harness::parse_config(path, {});
  CHECK(cfg.table_length == 32);
  CHECK(cfg.seq_length == 8);

  const auto banner = harness::resolved_banner(cfg);
  CHECK(banner.find("table_length=32") != std::string::npos);
  CHECK(banner.find("fbs.reaction_delay_us=5") != std::string::npos);
  CHECK(banner.find("snr_db=40") != std::string::npos);

  SUBCASE("unknown keys are rejected by name") {
    const auto bad = write_temp("cfg2", "tabel_length=32\n");
    CHECK_THROWS_WITH_AS(harness::parse_config(bad, {}),
                         doctest::Contains("tabel_length"), ConfigError);
  }
  SUBCASE("violated invariants name the key") {
    std::vector<std::string> overrides{"seq_length=40"};
    CHECK_THROWS_WITH_AS(harness::parse_config(path, overrides),
                         doctest::Contains("seq_length"), ConfigError);
  }
  SUBCASE("overrides take precedence over the file") {
    std::vector<std::string> overrides{"trials=100"};
    const auto resolved = harness::parse_config(path, overrides);
    CHECK(resolved.trials == 100);
  }
  SUBCASE("shipped defaults are valid") {
    ScenarioConfig defaults;
    CHECK_NOTHROW(defaults.validate());
    CHECK(defaults.table_length == 32);
    CHECK(defaults.seq_length == 8);
    CHECK(defaults.block_size == 4);
    CHECK(defaults.channel_order == 2);
    CHECK(defaults.modulation_order == 16);
  }
}

TEST_CASE("trials replay bit-exactly from their seed") {
  ScenarioConfig cfg;
  cfg.snr_db = 12.0;
  for (long index : {0L, 7L, 991L}) {
    const auto a = harness::run_trial(cfg, index);
    const auto b = harness::run_trial(cfg, index);
    CHECK(a.outcome == b.outcome);
    CHECK(a.true_start == b.true_start);
    CHECK(a.fbs_guess == b.fbs_guess);
    CHECK(a.legit_ber == b.legit_ber);
    CHECK(a.fbs_ber == b.fbs_ber);
    CHECK(a.rss_target_dbm == b.rss_target_dbm);
  }
}

TEST_CASE("without an attacker every noiseless trial hands over") {
  ScenarioConfig cfg;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.fbs_enabled = false;
  for (long i = 0; i < 200; ++i) {
    const auto o = harness::run_trial(cfg, i);
    REQUIRE_FALSE(o.error);
    CHECK(o.outcome == detectors::DetectionOutcome::LegitChosen);
    CHECK(o.legit_ber == 0.0);  // standard equals the later allocation
    CHECK(o.protocol_errors == 0);
    CHECK_FALSE(o.fbs_fired);
  }
}

TEST_CASE("an oracle attacker forces a coin-flip trial when noiseless") {
  ScenarioConfig cfg;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.fbs_oracle_start = true;
  int ties = 0;
  for (long i = 0; i < 200; ++i) {
    const auto o = harness::run_trial(cfg, i);
    REQUIRE_FALSE(o.error);
    CHECK(o.fbs_guess == o.true_start);
    CHECK(o.fbs_ber == 0.0);
    ties += o.tie;
  }
  CHECK(ties == 200);
}

TEST_CASE("trial timing diagnostics sit where the model says") {
  ScenarioConfig cfg;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  for (long i = 0; i < 50; ++i) {
    const auto o = harness::run_trial(cfg, i);
    REQUIRE_FALSE(o.error);
    // legit response lands at the window center, the forgery 1 us early
    CHECK(std::abs(o.legit_arrival_offset_us) < 1e-6);
    CHECK(o.fbs_arrival_offset_us == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("a forgery outside the anticipated window never wins") {
  ScenarioConfig cfg;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.fbs_oracle_start = true;          // even a perfect sequence
  cfg.fbs_timing_offset_us = -8.0;      // arrives 8 us early, slack is 2 us
  for (long i = 0; i < 300; ++i) {
    const auto o = harness::run_trial(cfg, i);
    REQUIRE_FALSE(o.error);
    CHECK(o.outcome == detectors::DetectionOutcome::LegitChosen);
  }
}

TEST_CASE("the message trace is causal and complete") {
  ScenarioConfig cfg;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.trace = true;
  const auto o = harness::run_trial(cfg, 3);
  REQUIRE_FALSE(o.error);
  REQUIRE(o.trace.size() >= 7);
  double prev = -1.0;
  int fbs_forgeries = 0;
  for (const auto& line : o.trace) {
    double t = 0.0;
    char sender[32], receiver[32], kind[40];
    REQUIRE(std::sscanf(line.c_str(), "%lf,%31[^,],%31[^,],%39s", &t, sender,
                        receiver, kind) == 4);
    CHECK(t >= prev);
    prev = t;
    if (std::string(sender) == "fbs") {
      CHECK(std::string(kind) == "ul_allocation");
      ++fbs_forgeries;
    }
  }
  CHECK(fbs_forgeries == 1);  // at most one forgery per handover attempt
}

TEST_CASE("sweeps aggregate counts exactly and order points") {
  ScenarioConfig cfg;
  cfg.trials = 400;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.threads = 2;
  const double values[] = {64, 16, 32};
  const auto results =
      harness::run_sweep(cfg, harness::SweepAxis::TableLength, values);
  REQUIRE(results.size() == 3);
  CHECK(results[0].table_len == 16);
  CHECK(results[1].table_len == 32);
  CHECK(results[2].table_len == 64);
  for (const auto& e : results) {
    CHECK(e.successes + e.legit + e.rejected + e.errors == e.trials);
    CHECK(e.scr >= 0.0);
    CHECK(e.scr <= 1.0);
    CHECK(e.ci_lo <= e.scr);
    CHECK(e.scr <= e.ci_hi);
    CHECK(e.scr ==
          static_cast<double>(e.successes) / static_cast<double>(e.trials));
  }
}

TEST_CASE("invalid sweep points are skipped, not fatal") {
  ScenarioConfig cfg;
  cfg.trials = 50;
  cfg.table_length = 32;
  const double values[] = {8, 40};  // 40 > table_length
  const auto results =
      harness::run_sweep(cfg, harness::SweepAxis::SeqLength, values);
  REQUIRE(results.size() == 1);
  CHECK(results[0].seq_len == 8);
}

TEST_CASE("csv output matches the fixed schema") {
  ScenarioConfig cfg;
  cfg.trials = 60;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  const double one[] = {32};
  const auto results =
      harness::run_sweep(cfg, harness::SweepAxis::TableLength, one);
  const auto text = csv_string(results);
  CHECK(text.substr(0, text.find('\n')) ==
        "scheme,table_len,seq_len,snr_db,fbs_power_dbm,trials,scr,ci95_lo,"
        "ci95_hi");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + one row

  SUBCASE("a ten-point sweep yields eleven ascending lines") {
    ScenarioConfig swept = cfg;
    swept.table_length = 2048;
    std::vector<double> values;
    for (int i = 0; i < 10; ++i) values.push_back(16 << i);
    const auto res =
        harness::run_sweep(swept, harness::SweepAxis::TableLength, values);
    const auto body = csv_string(res);
    CHECK(std::count(body.begin(), body.end(), '\n') == 11);
    std::size_t prev = 0;
    for (const auto& e : res) {
      CHECK(e.table_len > prev);
      prev = e.table_len;
    }
  }
}

TEST_CASE("rerun and thread count do not change a sweep byte") {
  ScenarioConfig cfg;
  cfg.trials = 500;
  cfg.seed = 99;
  const double values[] = {16, 32};

  cfg.threads = 1;
  const auto serial =
      csv_string(harness::run_sweep(cfg, harness::SweepAxis::TableLength, values));
  const auto serial_again =
      csv_string(harness::run_sweep(cfg, harness::SweepAxis::TableLength, values));
  cfg.threads = 4;
  const auto parallel =
      csv_string(harness::run_sweep(cfg, harness::SweepAxis::TableLength, values));
  CHECK(serial == serial_again);
  CHECK(serial == parallel);
}

TEST_CASE("every detector runs end to end") {
  for (const char* name : {"psd", "rss3sigma", "distance", "region"}) {
    ScenarioConfig cfg;
    cfg.trials = 200;
    cfg.snr_db = 20.0;
    cfg.detector = detectors::parse_detector(name);
    const double one[] = {20.0};
    const auto results = harness::run_sweep(cfg, harness::SweepAxis::Snr, one);
    REQUIRE(results.size() == 1);
    CHECK(results[0].errors == 0);
    CHECK(results[0].scheme == name);
  }
}

TEST_CASE("csv write failures carry the path") {
  std::vector<harness::ScrEstimate> results(1);
  results[0].scheme = "psd";
  CHECK_THROWS_WITH_AS(
      harness::write_csv(results, "/nonexistent-dir/out.csv"),
      doctest::Contains("/nonexistent-dir/out.csv"), IoError);
}
