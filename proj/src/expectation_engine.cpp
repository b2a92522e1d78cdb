#include "icsim/expectation_engine.hpp"

#include <map>
#include <string>

#include "icsim/config.hpp"

namespace icsim {

double singles_rate(const OperatorExpansion& x) {
  double rate = 0.0;
  for (const auto& t : x.collapsed()) {
    if (t.kind == LadderKind::Creation) rate += std::norm(t.coefficient);
  }
  return rate;
}

double coincidence_rate(const OperatorExpansion& s, const OperatorExpansion& i) {
  // s|0> = sum_m gamma_m |1_m>, gamma_m from s's creation terms.
  std::map<std::string, cplx> gamma;
  for (const auto& t : s.collapsed()) {
    if (t.kind == LadderKind::Creation) gamma[t.mode.name] += t.coefficient;
  }
  if (gamma.empty()) return 0.0;

  std::map<std::string, cplx> alpha;  // annihilators of i
  std::map<std::string, cplx> beta;   // creators of i
  for (const auto& t : i.collapsed()) {
    (t.kind == LadderKind::Annihilation ? alpha : beta)[t.mode.name] += t.coefficient;
  }

  // Vacuum component: annihilators contract against the single photon.
  cplx vacuum{0.0, 0.0};
  for (const auto& [mode, a] : alpha) {
    if (auto it = gamma.find(mode); it != gamma.end()) vacuum += a * it->second;
  }

  // Two-photon component sum_{n,m} c_nm a_n^dag a_m^dag |0> with
  // c_nm = beta_n gamma_m; its squared norm is sum c_nm^* (c_nm + c_mn).
  double two_photon = 0.0;
  for (const auto& [n, b_n] : beta) {
    for (const auto& [m, g_m] : gamma) {
      const cplx c_nm = b_n * g_m;
      cplx c_mn{0.0, 0.0};
      auto bm = beta.find(m);
      auto gn = gamma.find(n);
      if (bm != beta.end() && gn != gamma.end()) c_mn = bm->second * gn->second;
      two_photon += (std::conj(c_nm) * (c_nm + c_mn)).real();
    }
  }
  return std::norm(vacuum) + two_photon;
}

SetupChannels build_channels(const ExperimentConfig& config, const DelaySetting& delays) {
  const double lambda_s = config.signal_wavelength();
  const double lambda_i = config.idler_wavelength();

  ModeRegistry modes;
  const ModeLabel so1 = modes.add("so1", ModeRole::SignalVacuum, lambda_s);
  const ModeLabel io1 = modes.add("io1", ModeRole::IdlerVacuum, lambda_i);
  const ModeLabel so2 = modes.add("so2", ModeRole::SignalVacuum, lambda_s);
  const ModeLabel anc = modes.add("anc_link", ModeRole::AncillaVacuum, lambda_i);

  const cplx k1{config.gain1, 0.0};
  const cplx k2 = std::polar(config.gain2, delays.pump_phase(config.pump.wavelength));

  auto [s1, i1] = spdc(OperatorExpansion::annihilator(so1), OperatorExpansion::annihilator(io1), k1);
  const OperatorExpansion seed = attenuate(i1, config.eta, anc);
  auto [s2, i2] = spdc(OperatorExpansion::annihilator(so2), seed, k2);
  const OperatorExpansion s1_delayed = phase_delay(s1, delays.delta_x_s, lambda_s);
  auto [out_a, out_dark] =
      beam_splitter(s2, s1_delayed, BeamSplitterParams::from_reflectivity(config.bs_reflectivity));

  const int degree = config.truncation_degree;
  return SetupChannels{truncate(out_a, degree), truncate(i2, degree), truncate(out_dark, degree)};
}

RatePrediction compose_setup(const ExperimentConfig& config, const DelaySetting& delays) {
  const SetupChannels ch = build_channels(config, delays);
  return RatePrediction{singles_rate(ch.detector_a), singles_rate(ch.detector_b),
                        coincidence_rate(ch.detector_a, ch.detector_b)};
}

}  // namespace icsim
