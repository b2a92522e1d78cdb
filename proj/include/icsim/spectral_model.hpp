#pragma once

#include <stdexcept>

namespace icsim {

struct ExperimentConfig;
struct DelaySetting;
struct RatePrediction;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

class SpectralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gaussian spectral density given by its center wavelength and FWHM,
/// the FWHM stated either in wavelength or in frequency.
struct SpectralProfile {
  enum class WidthUnit { Wavelength, Frequency };

  double center_wavelength = 0.0;  // m
  double fwhm = 0.0;               // m or Hz, per unit
  WidthUnit unit = WidthUnit::Wavelength;

  static SpectralProfile from_wavelength_fwhm(double center, double fwhm_m);
  static SpectralProfile from_frequency_fwhm(double center, double fwhm_hz);

  void validate() const;
};

/// Frequency FWHM: c * dlambda / lambda^2, or the stored value.
double frequency_fwhm(const SpectralProfile& p);

/// Normalized magnitude of the spectrum's Fourier transform at delay
/// delta_x / c: exp(-(pi dnu dx / c)^2 / (4 ln 2)).
double envelope(const SpectralProfile& p, double delta_x);

/// Delay at which envelope() drops to 1/2: 2 ln2 c / (pi dnu).
double coherence_length(const SpectralProfile& p);

/// Frequency FWHM giving the requested half-maximum coherence length.
double bandwidth_for_coherence_length(double length);

/// Envelope-modulated rates: baseline unchanged, fringe part of p_a and
/// p_ab scaled by env_signal(dx_s) * env_pump(dx_p).
RatePrediction modulated_rates(const ExperimentConfig& config, const DelaySetting& delays);

}  // namespace icsim
