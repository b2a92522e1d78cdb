#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace icsim {

struct RatePrediction;

class CountingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Detector calibration and counting parameters.
///
/// rate_a_cal / rate_b_cal are the detected rates at the fringe baseline;
/// coincidence_efficiency is the fraction of D_A baseline detections that
/// are also registered at D_B. pair_rate is the generated pair rate used for
/// the double-pair check; when unset the detected idler rate stands in as a
/// lower bound.
struct CountingConfig {
  double rate_a_cal = 42000.0;   // 1/s
  double rate_b_cal = 110000.0;  // 1/s
  double coincidence_efficiency = 0.1;
  double window = 2e-9;          // s
  double dwell = 0.5;            // s
  double pair_rate = 0.0;        // 1/s, 0 = use rate_b_cal
  std::uint64_t seed = 20141117;

  double effective_pair_rate() const { return pair_rate > 0.0 ? pair_rate : rate_b_cal; }
  void validate() const;
};

/// Detected rates in counts per second.
struct DetectedRates {
  double rate_a = 0.0;
  double rate_b = 0.0;
  double coincidence = 0.0;  // true coincidences
  double accidental = 0.0;
};

struct CountSample {
  std::uint64_t counts_a = 0;
  std::uint64_t counts_b = 0;
  std::uint64_t coincidences = 0;  // true + accidental
  double accidentals_expected = 0.0;
};

/// Maps model rates (|K|^2 units) to detected rates, given the model
/// baseline (fringe midpoint) at which the calibration rates hold.
DetectedRates calibrate(const RatePrediction& rates, const RatePrediction& baseline, const CountingConfig& cc);

double accidental_rate(double r_a, double r_b, double window);

/// P(N >= 2) for a Poisson pair number with mean pair_rate * window.
double double_pair_probability(double pair_rate, double window);

/// Engine for one scan point, keyed by (seed, point index) only.
std::mt19937_64 point_engine(std::uint64_t seed, std::uint64_t point_index);

/// Poisson draws of A, B, true coincidences and accidentals for one point.
CountSample sample_counts(const DetectedRates& rates, const CountingConfig& cc, std::uint64_t point_index);

}  // namespace icsim
