#include "icsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "icsim/operator_core.hpp"

namespace icsim {

std::string to_string(ScanAxis axis) { return axis == ScanAxis::Signal ? "signal" : "pump"; }

ScanAxis parse_axis(const std::string& text) {
  if (text == "signal") return ScanAxis::Signal;
  if (text == "pump") return ScanAxis::Pump;
  throw ConfigError("scan.axis must be 'signal' or 'pump', got '" + text + "'");
}

SpectralProfile PumpConfig::profile() const {
  if (coherence_length_override) {
    return SpectralProfile::from_frequency_fwhm(wavelength, bandwidth_for_coherence_length(*coherence_length_override));
  }
  return SpectralProfile::from_frequency_fwhm(wavelength, bandwidth);
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

double to_double(const std::string& value, const std::string& field) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = first + value.size();
  if (!value.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || !std::isfinite(out)) {
    throw ConfigError(field + ": expected a number, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& value, const std::string& field) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(field + ": expected an unsigned integer, got '" + value + "'");
  }
  return out;
}

Setter num(std::function<void(ExperimentConfig&, double)> apply) {
  return [apply](ExperimentConfig& c, const std::string& v, const std::string& field) { apply(c, to_double(v, field)); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"pump.wavelength_nm", num([](auto& c, double v) { c.pump.wavelength = v * 1e-9; })},
      {"pump.bandwidth_ghz", num([](auto& c, double v) { c.pump.bandwidth = v * 1e9; })},
      {"pump.power_mw", num([](auto& c, double v) { c.pump.power = v * 1e-3; })},
      {"pump.coherence_length_mm", num([](auto& c, double v) { c.pump.coherence_length_override = v * 1e-3; })},
      {"crystal1.gain", num([](auto& c, double v) { c.gain1 = v; })},
      {"crystal2.gain", num([](auto& c, double v) { c.gain2 = v; })},
      {"idler_link.eta", num([](auto& c, double v) { c.eta = v; })},
      {"beam_splitter.reflectivity", num([](auto& c, double v) { c.bs_reflectivity = v; })},
      {"signal_filter.center_nm", num([](auto& c, double v) { c.signal_filter.center_wavelength = v * 1e-9; })},
      {"signal_filter.fwhm_nm", num([](auto& c, double v) {
         c.signal_filter.fwhm = v * 1e-9;
         c.signal_filter.unit = SpectralProfile::WidthUnit::Wavelength;
       })},
      {"idler_filter.center_nm", num([](auto& c, double v) { c.idler_filter.center_wavelength = v * 1e-9; })},
      {"idler_filter.fwhm_nm", num([](auto& c, double v) {
         c.idler_filter.fwhm = v * 1e-9;
         c.idler_filter.unit = SpectralProfile::WidthUnit::Wavelength;
       })},
      {"detectors.rate_a_hz", num([](auto& c, double v) { c.detectors.rate_a_cal = v; })},
      {"detectors.rate_b_hz", num([](auto& c, double v) { c.detectors.rate_b_cal = v; })},
      {"detectors.coincidence_efficiency", num([](auto& c, double v) { c.detectors.coincidence_efficiency = v; })},
      {"detectors.window_ns", num([](auto& c, double v) { c.detectors.window = v * 1e-9; })},
      {"detectors.pair_rate_hz", num([](auto& c, double v) { c.detectors.pair_rate = v; })},
      {"detectors.seed",
       [](ExperimentConfig& c, const std::string& v, const std::string& f) { c.detectors.seed = to_u64(v, f); }},
      {"scan.axis", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.scan.axis = parse_axis(v); }},
      {"scan.start_um", num([](auto& c, double v) { c.scan.start = v * 1e-6; })},
      {"scan.stop_um", num([](auto& c, double v) { c.scan.stop = v * 1e-6; })},
      {"scan.step_nm", num([](auto& c, double v) { c.scan.step = v * 1e-9; })},
      {"scan.dwell_s", num([](auto& c, double v) { c.detectors.dwell = v; })},
      {"scan.fixed_delay_um", num([](auto& c, double v) { c.scan.fixed_delay = v * 1e-6; })},
      {"model.truncation_degree",
       [](ExperimentConfig& c, const std::string& v, const std::string& f) {
         const std::uint64_t d = to_u64(v, f);
         if (d > 16) throw ConfigError(f + " must be at most 16");
         c.truncation_degree = static_cast<int>(d);
       }},
  };
  return table;
}

const std::set<std::string> kSections = {"pump",         "crystal1",      "crystal2",  "idler_link", "beam_splitter",
                                         "signal_filter", "idler_filter", "detectors", "scan",       "model"};

}  // namespace

void ExperimentConfig::validate() const {
  require(positive(pump.wavelength), "pump.wavelength_nm must be positive");
  require(positive(pump.bandwidth), "pump.bandwidth_ghz must be positive");
  require(pump.power >= 0.0, "pump.power_mw must be nonnegative");
  require(!pump.coherence_length_override || positive(*pump.coherence_length_override),
          "pump.coherence_length_mm must be positive");
  require(gain1 >= 0.0 && gain1 < kMaxPerturbativeGain, "crystal1.gain out of [0,0.1)");
  require(gain2 >= 0.0 && gain2 < kMaxPerturbativeGain, "crystal2.gain out of [0,0.1)");
  require(eta >= 0.0 && eta <= 1.0, "idler_link.eta out of [0,1]");
  require(bs_reflectivity >= 0.0 && bs_reflectivity <= 1.0, "beam_splitter.reflectivity out of [0,1]");
  try {
    signal_filter.validate();
  } catch (const SpectralError& e) {
    throw ConfigError(std::string("signal_filter: ") + e.what());
  }
  try {
    idler_filter.validate();
  } catch (const SpectralError& e) {
    throw ConfigError(std::string("idler_filter: ") + e.what());
  }
  require(positive(scan.step), "scan.step_nm must be positive");
  require(scan.stop > scan.start, "scan.stop_um must exceed scan.start_um");
  require((scan.stop - scan.start) / scan.step <= 1e7, "scan: grid exceeds 1e7 points");
  require(truncation_degree >= 0, "model.truncation_degree must be nonnegative");
  try {
    detectors.validate();
  } catch (const CountingError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (kSections.count(section) == 0) throw ConfigError(where + "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) throw ConfigError(where + "duplicate section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + "empty key or value");
    const std::string field = section + "." + key;
    const auto it = setters().find(field);
    if (it == setters().end()) throw ConfigError(where + "unknown key " + field);
    if (!seen_keys.insert(field).second) throw ConfigError(where + "duplicate key " + field);
    try {
      it->second(cfg, value, field);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  // An empty [scan] header defines no scan.
  const bool scan_keys = std::any_of(seen_keys.begin(), seen_keys.end(),
                                     [](const std::string& k) { return k.rfind("scan.", 0) == 0; });
  if (!scan_keys) throw ConfigError("missing section [scan]");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace icsim
