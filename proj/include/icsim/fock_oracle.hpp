#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "icsim/expectation_engine.hpp"

namespace icsim {

struct ExperimentConfig;
struct DelaySetting;

namespace oracle {

class OracleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kMaxOracleGain = 1e-2;
inline constexpr int kMaxPerMode = 2;
inline constexpr int kMaxTotal = 4;

// Mode slots. After the combiner, kSlotS2 holds the D_A port and kSlotS1
// the dark port.
inline constexpr std::size_t kSlotS1 = 0;
inline constexpr std::size_t kSlotS2 = 1;
inline constexpr std::size_t kSlotIdler = 2;
inline constexpr std::size_t kSlotAncilla = 3;
inline constexpr std::size_t kModes = 4;

using Occupation = std::array<std::uint8_t, kModes>;

/// Truncated Fock-space state: occupation tuples to amplitudes.
struct FockState {
  std::map<Occupation, std::complex<double>> amplitudes;

  static FockState vacuum();
  double norm_squared() const;
};

/// Schroedinger-picture state of the two-crystal setup to first order in
/// each gain.
FockState build_state(const ExperimentConfig& config, const DelaySetting& delays);

/// <psi|n_A|psi>, <psi|n_B|psi>, <psi|n_A n_B|psi> by direct summation over
/// the basis. The perturbative state is not renormalized; its norm exceeds 1
/// at O(K^2), like the commutator deficit of the linearized operators.
RatePrediction detection_moments(const FockState& state);

}  // namespace oracle
}  // namespace icsim
