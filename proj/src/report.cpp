#include "icsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "icsim/counting_sim.hpp"
#include "icsim/expectation_engine.hpp"
#include "icsim/spectral_model.hpp"

namespace icsim {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Visibility of a rate over a full phase scan at zero delay envelope.
std::pair<double, double> phase_scan_visibility(const ExperimentConfig& config) {
  double a_hi = 0.0, a_lo = 1e300, c_hi = 0.0, c_lo = 1e300;
  constexpr int kSteps = 64;
  for (int k = 0; k < kSteps; ++k) {
    const DelaySetting d{config.pump.wavelength * k / kSteps, 0.0};
    const RatePrediction r = compose_setup(config, d);
    a_hi = std::max(a_hi, r.p_a);
    a_lo = std::min(a_lo, r.p_a);
    c_hi = std::max(c_hi, r.p_ab);
    c_lo = std::min(c_lo, r.p_ab);
  }
  auto vis = [](double hi, double lo) { return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0; };
  return {vis(a_hi, a_lo), vis(c_hi, c_lo)};
}

}  // namespace

LowGainCheck low_gain_check(const ExperimentConfig& config) {
  LowGainCheck c;
  c.pair_rate = config.detectors.effective_pair_rate();
  c.probability = double_pair_probability(c.pair_rate, config.detectors.window);
  c.violated = !(c.probability < kDoublePairLimit);
  return c;
}

std::string report(const ExperimentConfig& config) {
  std::ostringstream out;
  const SpectralProfile pump_nominal = SpectralProfile::from_frequency_fwhm(config.pump.wavelength, config.pump.bandwidth);
  const SpectralProfile pump = config.pump.profile();

  out << "Two-crystal induced-coherence interferometer\n\n";
  out << "Pump           " << fmt("%.1f nm", config.pump.wavelength * 1e9) << ", "
      << fmt("%.3g GHz FWHM", config.pump.bandwidth * 1e-9) << ", " << fmt("%.1f mW", config.pump.power * 1e3)
      << "\n";
  out << "Signal filter  " << fmt("%.1f nm", config.signal_filter.center_wavelength * 1e9) << ", "
      << fmt("%.4g GHz FWHM", frequency_fwhm(config.signal_filter) * 1e-9) << "\n";
  out << "Idler filter   " << fmt("%.1f nm", config.idler_filter.center_wavelength * 1e9) << ", "
      << fmt("%.4g GHz FWHM", frequency_fwhm(config.idler_filter) * 1e-9) << " (rates only)\n";
  out << "Gains          K1 = " << fmt("%.3g", config.gain1) << ", K2 = " << fmt("%.3g", config.gain2)
      << ", idler link eta = " << fmt("%.3f", config.eta)
      << ", combiner R = " << fmt("%.3f", config.bs_reflectivity) << "\n\n";

  out << "Coherence lengths (half-maximum of the Gaussian envelope)\n";
  out << "  pump, from bandwidth       " << fmt("%.3f mm", coherence_length(pump_nominal) * 1e3) << "\n";
  out << "  pump, quoted with setup    " << fmt("%.3f mm", kQuotedPumpCoherenceLength * 1e3) << "\n";
  const double ratio = coherence_length(pump_nominal) / kQuotedPumpCoherenceLength;
  out << "  note: the quoted value differs from the bandwidth-derived value by a factor "
      << fmt("%.2f", ratio) << "; the two are not reconciled.\n";
  if (config.pump.coherence_length_override) {
    out << "  pump, override in use      " << fmt("%.3f mm", *config.pump.coherence_length_override * 1e3) << " ("
        << fmt("%.4g GHz", frequency_fwhm(pump) * 1e-9) << " effective bandwidth)\n";
  }
  out << "  signal filter              " << fmt("%.1f um", coherence_length(config.signal_filter) * 1e6) << "\n";
  out << "  pump / signal ratio        " << fmt("%.1f", coherence_length(pump) / coherence_length(config.signal_filter))
      << "\n\n";

  const auto [vis_singles, vis_coinc] = phase_scan_visibility(config);
  out << "Predicted fringe visibility (zero delay)\n";
  out << "  singles D_A                " << fmt("%.4f", vis_singles) << "\n";
  out << "  coincidences D_A & D_B     " << fmt("%.4f", vis_coinc) << "\n";
  out << "  pump envelope at 600 um    " << fmt("%.4f", envelope(pump, 600e-6)) << "\n";
  out << "  signal envelope at 100 um  " << fmt("%.4f", envelope(config.signal_filter, 100e-6)) << "\n\n";

  const auto& det = config.detectors;
  out << "Counting\n";
  out << "  D_A / D_B baseline         " << fmt("%.0f", det.rate_a_cal) << " / " << fmt("%.0f", det.rate_b_cal)
      << " counts/s\n";
  out << "  coincidence window         " << fmt("%.3g ns", det.window * 1e9) << "\n";
  out << "  accidental rate            " << fmt("%.4g", accidental_rate(det.rate_a_cal, det.rate_b_cal, det.window))
      << " /s\n";
  const LowGainCheck lg = low_gain_check(config);
  out << "  pair rate " << (det.pair_rate > 0.0 ? "(configured)      " : "(idler rate bound)")
      << " " << fmt("%.4g", lg.pair_rate) << " /s\n";
  out << "  P(two pairs per window)    " << fmt("%.3e", lg.probability) << "\n";
  if (lg.violated) {
    out << "  WARNING: double-pair probability " << fmt("%.3e", lg.probability) << " is not below "
        << fmt("%.0e", kDoublePairLimit) << "; low-gain condition violated, stimulated emission not negligible.\n";
  } else {
    out << "  low-gain condition satisfied (< " << fmt("%.0e", kDoublePairLimit) << ")\n";
  }
  return out.str();
}

}  // namespace icsim
