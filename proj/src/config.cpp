#include "psd/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "psd/adversary.hpp"
#include "psd/errors.hpp"
#include "psd/phy.hpp"

namespace psd::harness {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct KeyDef {
  const char* name;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

const std::vector<KeyDef>& registry() {
  static const std::vector<KeyDef> defs = [] {
    std::vector<KeyDef> r;
    auto dbl = [&r](const char* name, double ScenarioConfig::* field) {
      r.push_back({name,
                   [name, field](ScenarioConfig& c, const std::string& v) {
                     c.*field = parse_double(name, v);
                   },
                   [field](const ScenarioConfig& c) {
                     return fmt_double(c.*field);
                   }});
    };
    auto boolean = [&r](const char* name, bool ScenarioConfig::* field) {
      r.push_back({name,
                   [name, field](ScenarioConfig& c, const std::string& v) {
                     c.*field = parse_bool(name, v);
                   },
                   [field](const ScenarioConfig& c) {
                     return c.*field ? "true" : "false";
                   }});
    };

    r.push_back({"modulation_order",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.modulation_order = static_cast<unsigned>(
                       parse_long("modulation_order", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.modulation_order);
                 }});
    r.push_back({"table_length",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.table_length = static_cast<std::size_t>(
                       parse_long("table_length", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.table_length);
                 }});
    r.push_back({"seq_length",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.seq_length =
                       static_cast<std::size_t>(parse_long("seq_length", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.seq_length);
                 }});
    r.push_back({"block_size",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.block_size = static_cast<int>(parse_long("block_size", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.block_size);
                 }});
    r.push_back({"channel_order",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.channel_order =
                       static_cast<int>(parse_long("channel_order", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.channel_order);
                 }});
    dbl("snr_db", &ScenarioConfig::snr_db);
    r.push_back({"detector",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.detector = detectors::parse_detector(v);
                 },
                 [](const ScenarioConfig& c) {
                   return std::string(detectors::detector_name(c.detector));
                 }});
    r.push_back({"trials",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.trials = parse_long("trials", v);
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.trials);
                 }});
    r.push_back({"seed",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.seed = parse_u64("seed", v);
                 },
                 [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
    r.push_back({"threads",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.threads = static_cast<int>(parse_long("threads", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.threads);
                 }});
    dbl("hysteresis_db", &ScenarioConfig::hysteresis_db);
    dbl("processing_delay_us", &ScenarioConfig::processing_delay_us);
    dbl("slack_us", &ScenarioConfig::slack_us);
    dbl("cell_radius_m", &ScenarioConfig::cell_radius_m);
    dbl("junction_band_lo", &ScenarioConfig::junction_band_lo);
    dbl("junction_band_hi", &ScenarioConfig::junction_band_hi);
    dbl("tx_power_dbm", &ScenarioConfig::tx_power_dbm);
    dbl("path_loss_exponent", &ScenarioConfig::path_loss_exponent);
    dbl("ref_loss_db", &ScenarioConfig::ref_loss_db);
    dbl("shadowing_sigma_db", &ScenarioConfig::shadowing_sigma_db);
    boolean("fbs.enabled", &ScenarioConfig::fbs_enabled);
    r.push_back({"fbs.power_policy",
                 [](ScenarioConfig& c, const std::string& v) {
                   adversary::parse_power_policy(v);  // validates
                   c.fbs_power_policy = v;
                 },
                 [](const ScenarioConfig& c) { return c.fbs_power_policy; }});
    dbl("fbs.power_dbm", &ScenarioConfig::fbs_power_dbm);
    dbl("fbs.max_power_dbm", &ScenarioConfig::fbs_max_power_dbm);
    dbl("fbs.annulus_rmin_m", &ScenarioConfig::fbs_annulus_rmin_m);
    dbl("fbs.annulus_rmax_m", &ScenarioConfig::fbs_annulus_rmax_m);
    dbl("fbs.reaction_delay_us", &ScenarioConfig::fbs_reaction_delay_us);
    dbl("fbs.timing_offset_us", &ScenarioConfig::fbs_timing_offset_us);
    boolean("fbs.oracle_start", &ScenarioConfig::fbs_oracle_start);
    dbl("ber_accept_threshold", &ScenarioConfig::ber_accept_threshold);
    dbl("distance_threshold_m", &ScenarioConfig::distance_threshold_m);
    dbl("region_alpha", &ScenarioConfig::region_alpha);
    r.push_back({"warmup_samples",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.warmup_samples =
                       static_cast<int>(parse_long("warmup_samples", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.warmup_samples);
                 }});
    r.push_back({"regular_info_len",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.regular_info_len = static_cast<std::size_t>(
                       parse_long("regular_info_len", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.regular_info_len);
                 }});
    r.push_back({"event_budget",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.event_budget =
                       static_cast<int>(parse_long("event_budget", v));
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.event_budget);
                 }});
    boolean("trace", &ScenarioConfig::trace);
    return r;
  }();
  return defs;
}

const KeyDef& find_key(const std::string& key) {
  for (const KeyDef& def : registry())
    if (key == def.name) return def;
  throw ConfigError("unknown config key: " + key);
}

}  // namespace

void ScenarioConfig::validate() const {
  phy::Modulation::qam(modulation_order);  // checks the order itself
  if (table_length < 2) throw ConfigError("table_length: must be >= 2");
  if (seq_length < 1 || seq_length > table_length)
    throw ConfigError("seq_length: must satisfy 1 <= seq_length <= "
                      "table_length (got " +
                      std::to_string(seq_length) + " with table_length " +
                      std::to_string(table_length) + ")");
  if (block_size < 1) throw ConfigError("block_size: must be >= 1");
  if (seq_length % static_cast<std::size_t>(block_size) != 0)
    throw ConfigError("seq_length: must be a whole number of blocks (" +
                      std::to_string(seq_length) + " % " +
                      std::to_string(block_size) + " != 0)");
  if (channel_order < 0) throw ConfigError("channel_order: must be >= 0");
  if (std::isnan(snr_db)) throw ConfigError("snr_db: must not be NaN");
  if (trials < 1) throw ConfigError("trials: must be >= 1");
  if (threads < 0) throw ConfigError("threads: must be >= 0");
  if (processing_delay_us < 0.0)
    throw ConfigError("processing_delay_us: must be >= 0");
  if (slack_us < 0.0) throw ConfigError("slack_us: must be >= 0");
  if (cell_radius_m <= 0.0) throw ConfigError("cell_radius_m: must be > 0");
  if (!(junction_band_lo > 0.0) || junction_band_lo > junction_band_hi)
    throw ConfigError("junction_band: must satisfy 0 < lo <= hi");
  if (!(path_loss_exponent > 0.0))
    throw ConfigError("path_loss_exponent: must be > 0");
  if (shadowing_sigma_db < 0.0)
    throw ConfigError("shadowing_sigma_db: must be >= 0");
  if (!(fbs_annulus_rmin_m > 0.0) || fbs_annulus_rmin_m >= fbs_annulus_rmax_m)
    throw ConfigError("fbs.annulus: must satisfy 0 < rmin < rmax");
  if (!(fbs_reaction_delay_us > 0.0))
    throw ConfigError("fbs.reaction_delay_us: must be > 0");
  adversary::parse_power_policy(fbs_power_policy);
  if (ber_accept_threshold < 0.0 || ber_accept_threshold > 1.0)
    throw ConfigError("ber_accept_threshold: must be in [0, 1]");
  if (!(distance_threshold_m > 0.0))
    throw ConfigError("distance_threshold_m: must be > 0");
  if (!(region_alpha > 0.0 && region_alpha < 1.0))
    throw ConfigError("region_alpha: must be in (0, 1)");
  if (warmup_samples < 2) throw ConfigError("warmup_samples: must be >= 2");
  if (event_budget < 16) throw ConfigError("event_budget: must be >= 16");
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    find_key(key).set(cfg, value);
  }
  return cfg;
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key=value, got '" + assignment +
                      "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  find_key(key).set(cfg, value);
}

ScenarioConfig parse_config(const std::optional<std::string>& path,
                            std::span<const std::string> overrides) {
  ScenarioConfig cfg = path ? parse_config_file(*path) : ScenarioConfig{};
  for (const std::string& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

std::string resolved_banner(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "# resolved config\n";
  for (const KeyDef& def : registry())
    out << def.name << "=" << def.get(cfg) << "\n";
  return out.str();
}

}  // namespace psd::harness
