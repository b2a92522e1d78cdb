#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "icsim/scan_analysis.hpp"

namespace icsim {

inline constexpr const char* kCsvHeader = "delay_m,rate_a_hz,rate_b_hz,coinc_hz,counts_a,counts_b,coinc_counts";

/// Writes the scan CSV. Without samples the count columns are written as 0.
void write_scan_csv(std::ostream& out, const ScanRecord& record, bool with_samples);

/// Reads a scan CSV back into a record. The dwell is not stored in the file;
/// it is set to 1 s so that FitSource::Predicted fits the rate columns.
ScanRecord read_scan_csv(std::istream& in);

/// Dwell implied by the count and rate columns, sum(counts_a) / sum(rate_a).
double implied_dwell(const ScanRecord& record);

/// False for a noiseless prediction CSV, whose count columns are all zero.
bool has_counts(const ScanRecord& record);

/// JSON summary; `dwell` converts the count baseline to a rate.
nlohmann::ordered_json fringe_fit_json(const FringeFit& fit, double dwell);

/// One row of the engine / oracle comparison.
struct OracleComparison {
  DelaySetting delays;
  RatePrediction engine;
  RatePrediction oracle;
  double deviation = 0.0;
};

struct OracleCheck {
  std::vector<OracleComparison> rows;
  double max_deviation = 0.0;
  double bound = 0.0;
  bool passed() const { return max_deviation <= bound * (1.0 + 1e-9); }
};

/// Relative deviation between two predictions, measured against the
/// leading-order rate scale |K1|^2 + |K2|^2.
double relative_deviation(const RatePrediction& a, const RatePrediction& b, double rate_scale);

/// Compares expectation engine and Fock oracle over a grid of pump and
/// signal phases for one configuration.
OracleCheck oracle_check(const ExperimentConfig& config, int phase_points = 8);

nlohmann::ordered_json oracle_check_json(const ExperimentConfig& config, const OracleCheck& check);

}  // namespace icsim
