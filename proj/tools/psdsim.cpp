// psdsim — Monte Carlo link simulator for precheck-sequence-based detection
// of false base stations during handover.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psd/adversary.hpp"
#include "psd/errors.hpp"
#include "psd/harness.hpp"
#include "psd/kernels.hpp"
#include "psd/seqtable.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::size_t begin = 0;
  while (begin <= csv.size()) {
    std::size_t end = csv.find(',', begin);
    if (end == std::string::npos) end = csv.size();
    const std::string item = csv.substr(begin, end - begin);
    if (item.empty()) throw psd::ConfigError("empty entry in --values list");
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw psd::ConfigError("--values: not a number: '" + item + "'");
    }
    begin = end + 1;
  }
  return out;
}

void print_banner(const psd::harness::ScenarioConfig& cfg) {
  std::fputs(psd::harness::resolved_banner(cfg).c_str(), stderr);
  std::fprintf(stderr, "# kernels=%s\n", psd::kernels::ops().name);
}

int run_sweep_cmd(const std::optional<std::string>& config_path,
                  const std::vector<std::string>& overrides,
                  const std::string& axis_name, const std::string& values_csv,
                  const std::string& out_path) {
  const auto cfg = psd::harness::parse_config(config_path, overrides);
  print_banner(cfg);
  const auto axis = psd::harness::parse_axis(axis_name);
  const auto values = parse_values(values_csv);
  const auto results = psd::harness::run_sweep(cfg, axis, values);
  for (const auto& e : results)
    std::fprintf(stderr, "# %s %s=%g scr=%.6g ci=[%.6g,%.6g] errors=%ld\n",
                 e.scheme.c_str(), axis_name.c_str(),
                 axis == psd::harness::SweepAxis::Snr ? e.snr_db
                 : axis == psd::harness::SweepAxis::FbsPower
                     ? e.fbs_power_dbm
                 : axis == psd::harness::SweepAxis::TableLength
                     ? static_cast<double>(e.table_len)
                     : static_cast<double>(e.seq_len),
                 e.scr, e.ci_lo, e.ci_hi, e.errors);
  psd::harness::write_csv(results, out_path);
  std::fprintf(stderr, "# wrote %s\n", out_path.c_str());
  return 0;
}

int run_trial_cmd(const std::optional<std::string>& config_path,
                  std::vector<std::string> overrides, long index) {
  overrides.emplace_back("trace=true");
  const auto cfg = psd::harness::parse_config(config_path, overrides);
  print_banner(cfg);
  const auto o = psd::harness::run_trial(cfg, index);
  for (const auto& line : o.trace) std::printf("%s\n", line.c_str());
  const char* outcome =
      o.error ? "TrialError"
      : o.outcome == psd::detectors::DetectionOutcome::FbsChosen ? "FbsChosen"
      : o.outcome == psd::detectors::DetectionOutcome::LegitChosen
          ? "LegitChosen"
          : "AllRejected";
  std::printf("outcome=%s tie=%d\n", outcome, o.tie ? 1 : 0);
  std::printf("true_start=%zu fbs_guess=%zu fbs_fired=%d\n", o.true_start,
              o.fbs_guess, o.fbs_fired ? 1 : 0);
  std::printf("legit_ber=%.6g fbs_ber=%.6g\n", o.legit_ber, o.fbs_ber);
  std::printf("legit_arrival_offset_us=%.6g fbs_arrival_offset_us=%.6g\n",
              o.legit_arrival_offset_us, o.fbs_arrival_offset_us);
  std::printf("rss_source_dbm=%.6g rss_target_dbm=%.6g rss_fbs_dbm=%.6g\n",
              o.rss_source_dbm, o.rss_target_dbm, o.rss_fbs_dbm);
  std::printf("fbs_tx_power_dbm=%.6g clamped=%d protocol_errors=%d\n",
              o.fbs_tx_power_dbm, o.fbs_power_clamped ? 1 : 0,
              o.protocol_errors);
  return 0;
}

int run_table_cmd(const std::optional<std::string>& config_path,
                  const std::vector<std::string>& overrides,
                  const std::optional<std::string>& out_path,
                  const std::optional<std::string>& check_path) {
  const auto cfg = psd::harness::parse_config(config_path, overrides);
  if (check_path) {
    const auto table = psd::seqtable::load_table_file(*check_path);
    std::printf("loaded %zu symbols from %s\n", table.size(),
                check_path->c_str());
    return 0;
  }
  if (!out_path) throw psd::ConfigError("table: need --out or --check");
  const auto mod = psd::phy::Modulation::qam(cfg.modulation_order);
  psd::Rng rng = psd::Rng::from_stream(cfg.seed, 0x7461626cull);
  const auto table =
      psd::seqtable::generate_table(cfg.table_length, mod, rng);
  psd::seqtable::dump_table_file(table, *out_path);
  std::fprintf(stderr, "# wrote %s (%zu symbols)\n", out_path->c_str(),
               table.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-level Monte Carlo simulator for precheck-sequence "
               "handover verification"};
  app.require_subcommand(1);

  std::string kernel = "auto";
  app.add_option("--kernel", kernel, "Kernel backend: auto, scalar or avx2")
      ->capture_default_str();

  std::optional<std::string> config_path;
  std::vector<std::string> overrides;

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep, write CSV");
  std::string axis, values_csv, out_path;
  sweep->add_option("--config", config_path, "Config file (key=value lines)");
  sweep->add_option("--axis", axis,
                    "Sweep axis: snr, fbs_power, table_length, seq_length")
      ->required();
  sweep->add_option("--values", values_csv, "Comma-separated axis values")
      ->required();
  sweep->add_option("--out", out_path, "Output CSV path")->required();
  std::optional<std::string> detector_opt;
  std::optional<long> trials_opt, seed_opt, threads_opt;
  sweep->add_option("--detector", detector_opt,
                    "Detector: psd, rss3sigma, distance, region");
  sweep->add_option("--trials", trials_opt, "Trials per sweep point");
  sweep->add_option("--seed", seed_opt, "Base seed");
  sweep->add_option("--threads", threads_opt, "Worker threads (0 = all)");
  sweep->add_option("--set", overrides, "Extra key=value overrides");

  auto* trial = app.add_subcommand("trial", "Run one verbose trial with trace");
  long trial_index = 0;
  trial->add_option("--config", config_path, "Config file (key=value lines)");
  trial->add_option("--index", trial_index, "Trial index")
      ->capture_default_str();
  trial->add_option("--detector", detector_opt, "Detector override");
  trial->add_option("--seed", seed_opt, "Base seed");
  trial->add_option("--set", overrides, "Extra key=value overrides");

  auto* table = app.add_subcommand("table", "Dump or check a symbol table");
  std::optional<std::string> table_out, table_check;
  table->add_option("--config", config_path, "Config file (key=value lines)");
  table->add_option("--seed", seed_opt, "Base seed");
  table->add_option("--out", table_out, "Write the table to this path");
  table->add_option("--check", table_check, "Load and validate this dump");
  table->add_option("--set", overrides, "Extra key=value overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    psd::kernels::select_backend(kernel);
    if (detector_opt) overrides.push_back("detector=" + *detector_opt);
    if (trials_opt) overrides.push_back("trials=" + std::to_string(*trials_opt));
    if (seed_opt) overrides.push_back("seed=" + std::to_string(*seed_opt));
    if (threads_opt)
      overrides.push_back("threads=" + std::to_string(*threads_opt));

    if (sweep->parsed())
      return run_sweep_cmd(config_path, overrides, axis, values_csv, out_path);
    if (trial->parsed()) return run_trial_cmd(config_path, overrides, trial_index);
    if (table->parsed())
      return run_table_cmd(config_path, overrides, table_out, table_check);
    return 1;
  } catch (const psd::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const psd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
