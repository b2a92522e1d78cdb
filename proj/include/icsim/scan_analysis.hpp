#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "icsim/config.hpp"
#include "icsim/counting_sim.hpp"
#include "icsim/expectation_engine.hpp"

namespace icsim {

/// One delay scan along the signal or pump axis.
struct ScanRecord {
  ScanAxis axis = ScanAxis::Signal;
  std::vector<double> delays;             // m, strictly increasing
  std::vector<RatePrediction> predicted;  // model units
  std::vector<DetectedRates> rates;       // calibrated, 1/s
  std::vector<CountSample> samples;
  ExperimentConfig config;
  std::vector<std::string> warnings;

  std::size_t size() const { return delays.size(); }
  void validate() const;
};

std::vector<double> make_grid(double start, double stop, double step);

/// Evaluates modulated rates and samples counts at every grid point.
ScanRecord run_scan(const ExperimentConfig& config, ScanAxis axis, const std::vector<double>& grid);

/// Scan along config.scan.
ScanRecord run_scan(const ExperimentConfig& config);

enum class FitChannel { Singles, Coincidence };
enum class FitSource { Counts, Predicted };

FitChannel parse_channel(const std::string& text);

struct FitOptions {
  FitChannel channel = FitChannel::Singles;
  FitSource source = FitSource::Counts;
  int max_iterations = 200;
  double tolerance = 1e-10;  // relative parameter change
};

/// Fringe parameters of R(x) = B [1 + V exp(-(x-x0)^2 / 2 sigma^2) cos(2 pi x / L + phi)].
struct FringeFit {
  double period = 0.0;            // L, m
  double visibility = 0.0;        // V
  double envelope_center = 0.0;   // x0, m
  double envelope_sigma = 0.0;    // m
  double envelope_fwhm = 0.0;     // m
  double phase = 0.0;             // rad, wrapped to (-pi, pi]
  double baseline = 0.0;          // B, data units
  double period_sigma = 0.0;
  double visibility_sigma = 0.0;
  double envelope_center_sigma = 0.0;
  double envelope_fwhm_sigma = 0.0;
  double phase_sigma = 0.0;
  double baseline_sigma = 0.0;
  double reduced_residual = 0.0;  // weighted chi^2 / (N - 6)
  double relative_residual = 0.0; // ||y - m|| / ||y||
  bool envelope_is_lower_bound = false;
  bool converged = false;
  int iterations = 0;

  double evaluate(double x) const;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, FringeFit best) : std::runtime_error(what), best_(best) {}
  const FringeFit& best() const { return best_; }

 private:
  FringeFit best_;
};

class NoFringeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// x / y series a fit runs on.
struct FitData {
  std::vector<double> x;
  std::vector<double> y;
};

FitData fit_data(const ScanRecord& record, const FitOptions& options = {});

/// Period from the strongest peak of the periodogram of mean-subtracted data.
double estimate_period(const FitData& data);
double estimate_period(const ScanRecord& record, const FitOptions& options = {});

/// Damped least-squares fit of the envelope-modulated sinusoid with Poisson
/// weights. Throws FitError carrying the best parameters on non-convergence.
FringeFit fit_fringe(const FitData& data, const FitOptions& options = {});
FringeFit fit_fringe(const ScanRecord& record, const FitOptions& options = {});

/// (max - min) / (max + min) of the fitted model over one period at the
/// envelope center; 0 when no fringe is present.
double visibility_minmax(const FringeFit& fit);
double visibility_minmax(const ScanRecord& record, const FitOptions& options = {});

}  // namespace icsim
