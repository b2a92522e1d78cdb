#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "icsim/config.hpp"
#include "icsim/counting_sim.hpp"
#include "icsim/expectation_engine.hpp"
#include "icsim/scan_analysis.hpp"

using namespace icsim;

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments sample_moments(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= static_cast<double>(xs.size() - 1);
  return m;
}

// Draws counts_a at `mean` for point indices 0..n-1.
std::vector<double> draws(double mean, std::size_t n, std::uint64_t seed) {
  CountingConfig cc;
  cc.seed = seed;
  cc.dwell = 1.0;
  DetectedRates r;
  r.rate_a = mean;
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) xs[k] = static_cast<double>(sample_counts(r, cc, k).counts_a);
  return xs;
}

}  // namespace

TEST_CASE("accidental rate") {
  CHECK(accidental_rate(42e3, 110e3, 2e-9) == doctest::Approx(9.24).epsilon(1e-14));
  CHECK(accidental_rate(0.0, 110e3, 2e-9) == 0.0);
  CHECK(accidental_rate(1e6, 1e6, 1e-9) == doctest::Approx(1e3).epsilon(1e-14));
}

TEST_CASE("double pair probability") {
  CHECK(double_pair_probability(0.0, 2e-9) == 0.0);
  CHECK(double_pair_probability(1e-3, 2e-9) == doctest::Approx(0.5 * 2e-12 * 2e-12).epsilon(1e-6));
  const double mu = 5e6 * 2e-9;
  CHECK(double_pair_probability(5e6, 2e-9) == doctest::Approx(1.0 - std::exp(-mu) * (1.0 + mu)).epsilon(1e-9));
  CHECK(double_pair_probability(5e6, 2e-9) == doctest::Approx(4.98e-5).epsilon(1e-3));
  CHECK(double_pair_probability(1.1e5, 2e-9) == doctest::Approx(2.4e-8).epsilon(1e-2));
  CHECK(double_pair_probability(5e7, 2e-9) < 1e-2);
  CHECK(double_pair_probability(1e9, 2e-9) == doctest::Approx(1.0 - 3.0 * std::exp(-2.0)).epsilon(1e-12));
  double prev = 0.0;
  for (double rate = 1e3; rate <= 5e7; rate *= 1.5) {
    const double p = double_pair_probability(rate, 2e-9);
    CHECK(p > prev);
    CHECK(p < 1e-2);
    prev = p;
  }
  CHECK_THROWS_AS(double_pair_probability(-1.0, 2e-9), CountingError);
}

TEST_CASE("zero rates sample to zero") {
  const CountSample s = sample_counts(DetectedRates{}, CountingConfig{}, 17);
  CHECK(s.counts_a == 0);
  CHECK(s.counts_b == 0);
  CHECK(s.coincidences == 0);
  CHECK(s.accidentals_expected == 0.0);
}

TEST_CASE("calibrated baseline rates") {
  CountingConfig cc;
  DetectedRates r;
  r.rate_a = cc.rate_a_cal;
  r.rate_b = cc.rate_b_cal;
  r.accidental = accidental_rate(r.rate_a, r.rate_b, cc.window);
  const CountSample s = sample_counts(r, cc, 0);
  CHECK(s.accidentals_expected / cc.dwell == doctest::Approx(9.24).epsilon(1e-14));
}

TEST_CASE("mean of 21000 counts over 1000 draws") {
  const Moments m = sample_moments(draws(42e3 * 0.5, 1000, 99));
  CHECK(std::abs(m.mean - 21000.0) < 3.0 * std::sqrt(21000.0) / std::sqrt(1000.0));
}

TEST_CASE("Poisson mean and variance at 5 sigma over 1e4 draws") {
  for (double lambda : {0.7, 3.0, 50.0, 21000.0, 4.2e6}) {
    const std::size_t n = 10000;
    const Moments m = sample_moments(draws(lambda, n, 20141117));
    const double nn = static_cast<double>(n);
    CAPTURE(lambda);
    CHECK(std::abs(m.mean - lambda) < 5.0 * std::sqrt(lambda / nn));
    // Var(s^2) = (2 lambda^2 + lambda) / n for Poisson draws.
    CHECK(std::abs(m.variance - lambda) < 5.0 * std::sqrt((2.0 * lambda * lambda + lambda) / nn));
  }
}

TEST_CASE("sampling is keyed by seed and point index only") {
  CountingConfig cc;
  DetectedRates r{42e3, 110e3, 4.2e3, 9.24};
  const CountSample a = sample_counts(r, cc, 12345);
  // Evaluate other points in between: no hidden stream state.
  for (std::uint64_t k = 0; k < 100; ++k) sample_counts(r, cc, k);
  const CountSample b = sample_counts(r, cc, 12345);
  CHECK(a.counts_a == b.counts_a);
  CHECK(a.counts_b == b.counts_b);
  CHECK(a.coincidences == b.coincidences);

  const CountSample other_point = sample_counts(r, cc, 12346);
  CHECK(other_point.counts_a != a.counts_a);
  cc.seed += 1;
  CHECK(sample_counts(r, cc, 12345).counts_a != a.counts_a);

  auto e1 = point_engine(7, 3);
  auto e2 = point_engine(7, 3);
  CHECK(e1() == e2());
  CHECK(point_engine(7, 3)() != point_engine(7, 4)());
  CHECK(point_engine(7, 3)() != point_engine(8, 3)());
}

TEST_CASE("coincidences add true and accidental draws") {
  CountingConfig cc;
  cc.dwell = 1.0;
  DetectedRates r;
  r.coincidence = 0.0;
  r.accidental = 400.0;
  std::vector<double> xs;
  for (std::uint64_t k = 0; k < 10000; ++k) xs.push_back(static_cast<double>(sample_counts(r, cc, k).coincidences));
  const Moments m = sample_moments(xs);
  CHECK(std::abs(m.mean - 400.0) < 5.0 * std::sqrt(400.0 / 1e4));
  r.coincidence = 600.0;
  xs.clear();
  for (std::uint64_t k = 0; k < 10000; ++k) xs.push_back(static_cast<double>(sample_counts(r, cc, k).coincidences));
  CHECK(std::abs(sample_moments(xs).mean - 1000.0) < 5.0 * std::sqrt(1000.0 / 1e4));
}

TEST_CASE("overflow and invalid means are rejected") {
  CountingConfig cc;
  cc.dwell = 1.0;
  DetectedRates r;
  r.rate_a = 1e17;
  CHECK_THROWS_AS(sample_counts(r, cc, 0), CountingError);
  r.rate_a = -1.0;
  CHECK_THROWS_AS(sample_counts(r, cc, 0), CountingError);
  r.rate_a = std::nan("");
  CHECK_THROWS_AS(sample_counts(r, cc, 0), CountingError);
}

TEST_CASE("calibration") {
  CountingConfig cc;
  const RatePrediction base{2e-6, 3e-6, 2.2e-6};
  SUBCASE("baseline maps to the calibration rates") {
    const DetectedRates d = calibrate(base, base, cc);
    CHECK(d.rate_a == doctest::Approx(42e3));
    CHECK(d.rate_b == doctest::Approx(110e3));
    CHECK(d.coincidence == doctest::Approx(0.1 * 42e3 * 1.1));
    CHECK(d.accidental == doctest::Approx(42e3 * 110e3 * 2e-9));
  }
  SUBCASE("rates scale linearly") {
    const DetectedRates d = calibrate(RatePrediction{3e-6, 3e-6, 1e-6}, base, cc);
    CHECK(d.rate_a == doctest::Approx(63e3));
    CHECK(d.coincidence == doctest::Approx(0.1 * 42e3 * 0.5));
  }
  SUBCASE("vanishing model baseline stays at the calibration rates") {
    const DetectedRates d = calibrate(RatePrediction{}, RatePrediction{}, cc);
    CHECK(d.rate_a == 42e3);
    CHECK(d.rate_b == 110e3);
    CHECK(d.coincidence == doctest::Approx(0.1 * 42e3));
  }
}

TEST_CASE("config validation") {
  CountingConfig cc;
  CHECK_NOTHROW(cc.validate());
  cc.window = 1.0;
  CHECK_THROWS_AS(cc.validate(), CountingError);
  cc = CountingConfig{};
  cc.rate_a_cal = 0.0;
  CHECK_THROWS_AS(cc.validate(), CountingError);
  cc = CountingConfig{};
  cc.coincidence_efficiency = 1.5;
  CHECK_THROWS_AS(cc.validate(), CountingError);
  cc = CountingConfig{};
  CHECK(cc.effective_pair_rate() == cc.rate_b_cal);
  cc.pair_rate = 5e6;
  CHECK(cc.effective_pair_rate() == 5e6);
}

TEST_CASE("fitted visibility converges as the dwell grows") {
  ExperimentConfig c;
  c.eta = 0.7;
  std::vector<double> rms;
  for (double dwell : {0.005, 0.05, 0.5}) {
    c.detectors.dwell = dwell;
    double sum = 0.0;
    constexpr int kSeeds = 10;
    for (int s = 0; s < kSeeds; ++s) {
      c.detectors.seed = 500 + static_cast<std::uint64_t>(s);
      const FringeFit f = fit_fringe(run_scan(c));
      sum += (f.visibility - 0.7) * (f.visibility - 0.7);
    }
    rms.push_back(std::sqrt(sum / kSeeds));
  }
  MESSAGE("rms visibility error " << rms[0] << " " << rms[1] << " " << rms[2]);
  CHECK(rms[0] > rms[1]);
  CHECK(rms[1] > rms[2]);
  CHECK(rms[2] < 0.005);
}
