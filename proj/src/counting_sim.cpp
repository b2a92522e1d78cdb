#include "icsim/counting_sim.hpp"

#include <cmath>
#include <string>

#include "icsim/expectation_engine.hpp"

namespace icsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Means above this cannot be held exactly in the 64-bit counters.
constexpr double kMaxMean = 9.0e15;

std::uint64_t draw(std::mt19937_64& engine, double mean, const char* channel) {
  if (!std::isfinite(mean) || mean < 0.0) {
    throw CountingError(std::string("invalid expected count for ") + channel);
  }
  if (mean > kMaxMean) {
    throw CountingError(std::string("expected count overflow for ") + channel);
  }
  if (mean == 0.0) return 0;
  std::poisson_distribution<long long> poisson(mean);
  return static_cast<std::uint64_t>(poisson(engine));
}

}  // namespace

void CountingConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw CountingError(std::string("detectors.") + name + " must be positive");
  };
  positive(rate_a_cal, "rate_a_hz");
  positive(rate_b_cal, "rate_b_hz");
  positive(window, "window_ns");
  if (!(dwell > 0.0) || !std::isfinite(dwell)) throw CountingError("scan.dwell_s must be positive");
  if (!(coincidence_efficiency > 0.0 && coincidence_efficiency <= 1.0)) {
    throw CountingError("detectors.coincidence_efficiency out of (0,1]");
  }
  if (!(pair_rate >= 0.0) || !std::isfinite(pair_rate)) {
    throw CountingError("detectors.pair_rate_hz must be nonnegative");
  }
  if (!(window < 1e-3 * dwell)) throw CountingError("detectors.window_ns must be much shorter than the dwell");
}

DetectedRates calibrate(const RatePrediction& rates, const RatePrediction& baseline, const CountingConfig& cc) {
  // A vanishing baseline (no gain) leaves nothing to modulate: the record is
  // flat at the calibrated rates.
  auto ratio = [](double v, double base) { return base > 0.0 ? v / base : 1.0; };
  DetectedRates out;
  out.rate_a = cc.rate_a_cal * ratio(rates.p_a, baseline.p_a);
  out.coincidence = cc.coincidence_efficiency * cc.rate_a_cal *
                    (baseline.p_a > 0.0 ? rates.p_ab / baseline.p_a : 1.0);
  out.rate_b = cc.rate_b_cal * ratio(rates.p_b, baseline.p_b);
  out.accidental = accidental_rate(out.rate_a, out.rate_b, cc.window);
  return out;
}

double accidental_rate(double r_a, double r_b, double window) { return r_a * r_b * window; }

double double_pair_probability(double pair_rate, double window) {
  const double mu = pair_rate * window;
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw CountingError("double_pair_probability: invalid mean");
  if (mu == 0.0) return 0.0;
  if (mu > 1.0) return 1.0 - std::exp(-mu) * (1.0 + mu);
  // e^{-mu} sum_{k>=2} mu^k / k!, free of the cancellation in 1 - e^{-mu}(1+mu).
  double term = mu * mu / 2.0;
  double sum = 0.0;
  for (int k = 2; k < 64 && term > 1e-18 * sum; ++k) {
    sum += term;
    term *= mu / (k + 1);
  }
  return std::exp(-mu) * sum;
}

std::mt19937_64 point_engine(std::uint64_t seed, std::uint64_t point_index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(point_index + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(point_index), static_cast<std::uint32_t>(point_index >> 32)};
  return std::mt19937_64(seq);
}

CountSample sample_counts(const DetectedRates& rates, const CountingConfig& cc, std::uint64_t point_index) {
  std::mt19937_64 engine = point_engine(cc.seed, point_index);
  CountSample s;
  s.counts_a = draw(engine, rates.rate_a * cc.dwell, "D_A");
  s.counts_b = draw(engine, rates.rate_b * cc.dwell, "D_B");
  const std::uint64_t true_coinc = draw(engine, rates.coincidence * cc.dwell, "coincidences");
  s.accidentals_expected = rates.accidental * cc.dwell;
  const std::uint64_t accidental = draw(engine, s.accidentals_expected, "accidentals");
  s.coincidences = true_coinc + accidental;
  return s;
}

}  // namespace icsim
