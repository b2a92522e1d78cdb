#include "icsim/scan_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "icsim/fock_oracle.hpp"

namespace icsim {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v == 0.0 ? 0.0 : v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(v)) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, int line_no) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) + ": bad count '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace

void write_scan_csv(std::ostream& out, const ScanRecord& record, bool with_samples) {
  record.validate();
  out << kCsvHeader << '\n';
  for (std::size_t k = 0; k < record.size(); ++k) {
    const auto& r = record.rates[k];
    out << sci(record.delays[k]) << ',' << sci(r.rate_a) << ',' << sci(r.rate_b) << ','
        << sci(r.coincidence + r.accidental);
    if (with_samples) {
      const auto& s = record.samples[k];
      out << ',' << s.counts_a << ',' << s.counts_b << ',' << s.coincidences << '\n';
    } else {
      out << ",0,0,0\n";
    }
  }
}

ScanRecord read_scan_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::invalid_argument("csv: unexpected header '" + line + "'");

  ScanRecord rec;
  rec.config.detectors.dwell = 1.0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 7) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected 7 columns");
    }
    rec.delays.push_back(parse_double(cells[0], line_no));
    DetectedRates r;
    r.rate_a = parse_double(cells[1], line_no);
    r.rate_b = parse_double(cells[2], line_no);
    r.coincidence = parse_double(cells[3], line_no);
    rec.rates.push_back(r);
    CountSample s;
    s.counts_a = parse_count(cells[4], line_no);
    s.counts_b = parse_count(cells[5], line_no);
    s.coincidences = parse_count(cells[6], line_no);
    rec.samples.push_back(s);
    rec.predicted.push_back(RatePrediction{});
  }
  rec.validate();
  return rec;
}

bool has_counts(const ScanRecord& record) {
  return std::any_of(record.samples.begin(), record.samples.end(), [](const CountSample& s) {
    return s.counts_a != 0 || s.counts_b != 0 || s.coincidences != 0;
  });
}

double implied_dwell(const ScanRecord& record) {
  double counts = 0.0;
  double rate = 0.0;
  for (std::size_t k = 0; k < record.size(); ++k) {
    counts += static_cast<double>(record.samples[k].counts_a);
    rate += record.rates[k].rate_a;
  }
  return counts > 0.0 && rate > 0.0 ? counts / rate : 1.0;
}

nlohmann::ordered_json fringe_fit_json(const FringeFit& fit, double dwell) {
  nlohmann::ordered_json j;
  j["period_m"] = fit.period;
  j["period_sigma_m"] = fit.period_sigma;
  j["visibility"] = fit.visibility;
  j["visibility_sigma"] = fit.visibility_sigma;
  j["envelope_center_m"] = fit.envelope_center;
  j["envelope_fwhm_m"] = fit.envelope_fwhm;
  j["phase_rad"] = fit.phase;
  j["baseline_hz"] = fit.baseline / dwell;
  j["reduced_residual"] = fit.reduced_residual;
  j["converged"] = fit.converged;
  return j;
}

double relative_deviation(const RatePrediction& a, const RatePrediction& b, double rate_scale) {
  if (!(rate_scale > 0.0)) {
    const bool same = a.p_a == b.p_a && a.p_b == b.p_b && a.p_ab == b.p_ab;
    return same ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const double d = std::max({std::abs(a.p_a - b.p_a), std::abs(a.p_b - b.p_b), std::abs(a.p_ab - b.p_ab)});
  return d / rate_scale;
}

OracleCheck oracle_check(const ExperimentConfig& config, int phase_points) {
  OracleCheck check;
  const double k_max = std::max(config.gain1, config.gain2);
  check.bound = k_max * k_max;
  const double scale = config.gain1 * config.gain1 + config.gain2 * config.gain2;
  for (int jp = 0; jp < phase_points; ++jp) {
    for (int js = 0; js < phase_points; ++js) {
      OracleComparison row;
      row.delays.delta_x_p = config.pump.wavelength * jp / phase_points;
      row.delays.delta_x_s = config.signal_wavelength() * js / phase_points;
      row.engine = compose_setup(config, row.delays);
      row.oracle = oracle::detection_moments(oracle::build_state(config, row.delays));
      row.deviation = relative_deviation(row.engine, row.oracle, scale);
      check.max_deviation = std::max(check.max_deviation, row.deviation);
      check.rows.push_back(row);
    }
  }
  return check;
}

nlohmann::ordered_json oracle_check_json(const ExperimentConfig& config, const OracleCheck& check) {
  auto rates = [](const RatePrediction& r) {
    nlohmann::ordered_json j;
    j["p_a"] = r.p_a;
    j["p_b"] = r.p_b;
    j["p_ab"] = r.p_ab;
    return j;
  };
  nlohmann::ordered_json j;
  j["gain1"] = config.gain1;
  j["gain2"] = config.gain2;
  j["eta"] = config.eta;
  j["bs_reflectivity"] = config.bs_reflectivity;
  j["bound"] = check.bound;
  j["max_relative_deviation"] = check.max_deviation;
  j["passed"] = check.passed();
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : check.rows) {
    nlohmann::ordered_json r;
    r["delta_x_p_m"] = row.delays.delta_x_p;
    r["delta_x_s_m"] = row.delays.delta_x_s;
    r["engine"] = rates(row.engine);
    r["oracle"] = rates(row.oracle);
    r["relative_deviation"] = row.deviation;
    rows.push_back(std::move(r));
  }
  return j;
}

}  // namespace icsim
