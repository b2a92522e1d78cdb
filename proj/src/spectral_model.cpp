#include "icsim/spectral_model.hpp"

#include <cmath>
#include <numbers>

#include "icsim/config.hpp"
#include "icsim/expectation_engine.hpp"

namespace icsim {

SpectralProfile SpectralProfile::from_wavelength_fwhm(double center, double fwhm_m) {
  SpectralProfile p{center, fwhm_m, WidthUnit::Wavelength};
  p.validate();
  return p;
}

SpectralProfile SpectralProfile::from_frequency_fwhm(double center, double fwhm_hz) {
  SpectralProfile p{center, fwhm_hz, WidthUnit::Frequency};
  p.validate();
  return p;
}

void SpectralProfile::validate() const {
  if (!(center_wavelength > 0.0) || !std::isfinite(center_wavelength)) {
    throw SpectralError("spectral profile: center wavelength must be positive");
  }
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) {
    throw SpectralError("spectral profile: fwhm must be positive");
  }
  if (unit == WidthUnit::Wavelength && fwhm >= 0.1 * center_wavelength) {
    throw SpectralError("spectral profile: wavelength fwhm must be narrowband (< 10% of center)");
  }
}

double frequency_fwhm(const SpectralProfile& p) {
  if (p.unit == SpectralProfile::WidthUnit::Frequency) return p.fwhm;
  return kSpeedOfLight * p.fwhm / (p.center_wavelength * p.center_wavelength);
}

double envelope(const SpectralProfile& p, double delta_x) {
  const double arg = std::numbers::pi * frequency_fwhm(p) * delta_x / kSpeedOfLight;
  return std::exp(-arg * arg / (4.0 * std::numbers::ln2));
}

double coherence_length(const SpectralProfile& p) {
  return 2.0 * std::numbers::ln2 * kSpeedOfLight / (std::numbers::pi * frequency_fwhm(p));
}

double bandwidth_for_coherence_length(double length) {
  if (!(length > 0.0)) throw SpectralError("coherence length must be positive");
  return 2.0 * std::numbers::ln2 * kSpeedOfLight / (std::numbers::pi * length);
}

RatePrediction modulated_rates(const ExperimentConfig& config, const DelaySetting& delays) {
  const RatePrediction here = compose_setup(config, delays);
  const double env = envelope(config.signal_filter, delays.delta_x_s) *
                     envelope(config.pump.profile(), delays.delta_x_p);
  if (env == 1.0) return here;

  // Every rate is R0 + A cos(phi_p - phi_s + phi0); half a signal wave
  // flips the cosine, which separates baseline from fringe exactly.
  DelaySetting shifted = delays;
  shifted.delta_x_s += 0.5 * config.signal_wavelength();
  const RatePrediction flipped = compose_setup(config, shifted);

  auto blend = [env](double a, double b) {
    const double baseline = 0.5 * (a + b);
    const double fringe = 0.5 * (a - b);
    return baseline + env * fringe;
  };
  return RatePrediction{blend(here.p_a, flipped.p_a), here.p_b, blend(here.p_ab, flipped.p_ab)};
}

}  // namespace icsim
