#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "icsim/counting_sim.hpp"
#include "icsim/spectral_model.hpp"

namespace icsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScanAxis { Signal, Pump };

std::string to_string(ScanAxis axis);
ScanAxis parse_axis(const std::string& text);

struct PumpConfig {
  double wavelength = 355e-9;          // m
  double bandwidth = 45e9;             // Hz, FWHM
  double power = 0.038;                // W, metadata only
  std::optional<double> coherence_length_override;  // m

  /// Spectrum used for the pump-delay envelope; honours the override.
  SpectralProfile profile() const;
};

/// Delay grid; the dwell time per point lives in CountingConfig.
struct ScanConfig {
  ScanAxis axis = ScanAxis::Signal;
  double start = -2e-6;  // m
  double stop = 2e-6;    // m
  double step = 10e-9;   // m
  double fixed_delay = 0.0;  // m, the other axis' delay held during the scan
};

/// Declarative description of the two-crystal setup: pump, crystals, idler
/// link, signal combiner, filters, detectors and the delay scan.
struct ExperimentConfig {
  PumpConfig pump;
  double gain1 = 1e-3;
  double gain2 = 1e-3;
  double eta = 1.0;                    // idler link amplitude factor, mode overlap * transmission
  double bs_reflectivity = 0.5;        // power reflectivity of the signal combiner
  SpectralProfile signal_filter = SpectralProfile::from_wavelength_fwhm(808e-9, 2e-9);
  SpectralProfile idler_filter = SpectralProfile::from_wavelength_fwhm(632e-9, 3e-9);
  CountingConfig detectors;
  ScanConfig scan;
  int truncation_degree = 1;

  double signal_wavelength() const { return signal_filter.center_wavelength; }
  double idler_wavelength() const { return idler_filter.center_wavelength; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses the sectioned key=value format. Errors carry a line number or
/// the offending field name.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace icsim
