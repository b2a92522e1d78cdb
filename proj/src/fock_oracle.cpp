#include "icsim/fock_oracle.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "icsim/config.hpp"

namespace icsim::oracle {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 6.28318530717958647692;

// a_m^dagger on a truncated state; components leaving the truncated basis
// are dropped.
FockState create(const FockState& in, std::size_t mode) {
  FockState out;
  for (const auto& [occ, amp] : in.amplitudes) {
    int total = 0;
    for (auto n : occ) total += n;
    if (occ[mode] >= kMaxPerMode || total >= kMaxTotal) continue;
    Occupation next = occ;
    next[mode] += 1;
    out.amplitudes[next] += amp * std::sqrt(static_cast<double>(next[mode]));
  }
  return out;
}

void accumulate(FockState& into, const FockState& add, cd factor) {
  for (const auto& [occ, amp] : add.amplitudes) into.amplitudes[occ] += factor * amp;
}

// (1 + g a_s^dag a_i^dag) |psi>
FockState pair_creation(const FockState& in, std::size_t signal, std::size_t idler, cd g) {
  FockState out = in;
  accumulate(out, create(create(in, idler), signal), g);
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Passive mode transformation: every a_k^dagger in the state's creation
// polynomial is replaced by sum_j column[k][j] a_j^dagger.
using ModeMap = std::array<std::array<cd, kModes>, kModes>;

FockState transform(const FockState& in, const ModeMap& column) {
  FockState out;
  for (const auto& [occ, amp] : in.amplitudes) {
    double norm = 1.0;
    for (auto n : occ) norm *= factorial(n);
    FockState term;
    term.amplitudes[Occupation{}] = amp / std::sqrt(norm);
    for (std::size_t k = 0; k < kModes; ++k) {
      for (int q = 0; q < occ[k]; ++q) {
        FockState next;
        for (std::size_t j = 0; j < kModes; ++j) {
          if (column[k][j] != cd{0.0, 0.0}) accumulate(next, create(term, j), column[k][j]);
        }
        term = std::move(next);
      }
    }
    accumulate(out, term, 1.0);
  }
  return out;
}

ModeMap identity_map() {
  ModeMap m{};
  for (std::size_t k = 0; k < kModes; ++k) m[k][k] = 1.0;
  return m;
}

}  // namespace

FockState FockState::vacuum() {
  FockState s;
  s.amplitudes[Occupation{}] = 1.0;
  return s;
}

double FockState::norm_squared() const {
  double n = 0.0;
  for (const auto& [occ, amp] : amplitudes) n += std::norm(amp);
  return n;
}

FockState build_state(const ExperimentConfig& config, const DelaySetting& delays) {
  if (config.gain1 > kMaxOracleGain || config.gain2 > kMaxOracleGain) {
    throw OracleError("oracle: gain too large for the two-pair truncation");
  }
  const cd i{0.0, 1.0};
  const double phi_p = kTwoPi * delays.delta_x_p / config.pump.wavelength;
  const double phi_s = kTwoPi * delays.delta_x_s / config.signal_wavelength();

  FockState psi = FockState::vacuum();
  psi = pair_creation(psi, kSlotS1, kSlotIdler, i * config.gain1);

  // Idler loss as a rotation with the ancilla:
  // a_i^dag -> eta a_i^dag - sqrt(1 - eta^2) a_anc^dag.
  const double eta = config.eta;
  const double leak = std::sqrt((1.0 - eta) * (1.0 + eta));
  ModeMap loss = identity_map();
  loss[kSlotIdler][kSlotIdler] = eta;
  loss[kSlotIdler][kSlotAncilla] = -leak;
  loss[kSlotAncilla][kSlotAncilla] = eta;
  loss[kSlotAncilla][kSlotIdler] = leak;
  psi = transform(psi, loss);

  psi = pair_creation(psi, kSlotS2, kSlotIdler, i * std::polar(config.gain2, phi_p));

  ModeMap delay = identity_map();
  delay[kSlotS1][kSlotS1] = std::polar(1.0, phi_s);
  psi = transform(psi, delay);

  // Combiner, D_A port = t s2 + r s1, dark port = t s1 - r s2 (real t, r).
  // In the Schroedinger picture a_s2^dag -> t a_A^dag - r a_D^dag and
  // a_s1^dag -> r a_A^dag + t a_D^dag, with A in slot s2 and D in slot s1.
  const double r = std::sqrt(config.bs_reflectivity);
  const double t = std::sqrt(1.0 - config.bs_reflectivity);
  ModeMap combiner = identity_map();
  combiner[kSlotS2][kSlotS2] = t;
  combiner[kSlotS2][kSlotS1] = -r;
  combiner[kSlotS1][kSlotS2] = r;
  combiner[kSlotS1][kSlotS1] = t;
  return transform(psi, combiner);
}

RatePrediction detection_moments(const FockState& state) {
  double n_a = 0.0;
  double n_b = 0.0;
  double n_ab = 0.0;
  for (const auto& [occ, amp] : state.amplitudes) {
    const double w = std::norm(amp);
    const double a = occ[kSlotS2];
    const double b = occ[kSlotIdler];
    n_a += w * a;
    n_b += w * b;
    n_ab += w * a * b;
  }
  return RatePrediction{n_a, n_b, n_ab};
}

}  // namespace icsim::oracle
