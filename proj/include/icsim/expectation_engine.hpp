#pragma once

#include "icsim/operator_core.hpp"

namespace icsim {

struct ExperimentConfig;

/// Detection rates in units of the parametric gain |K|^2.
struct RatePrediction {
  double p_a = 0.0;   // signal singles at D_A
  double p_b = 0.0;   // idler singles at D_B
  double p_ab = 0.0;  // coincidences D_A & D_B
};

/// <0| x^dagger x |0>: sum of |beta|^2 over creation terms.
double singles_rate(const OperatorExpansion& x);

/// <0| s^dagger i^dagger i s |0> = || i s |0> ||^2 by exact contraction of
/// the one-photon state s|0> against i.
double coincidence_rate(const OperatorExpansion& s, const OperatorExpansion& i);

/// Output channels of the two-crystal interferometer.
struct SetupChannels {
  OperatorExpansion detector_a;  // signal, combiner port towards D_A
  OperatorExpansion detector_b;  // idler after the second crystal
  OperatorExpansion dark_port;   // second combiner port
};

/// Builds the channel expansions: SPDC in crystal 1, idler link with
/// amplitude factor eta, SPDC in crystal 2 with the pump phase on its gain,
/// signal delay, signal combiner.
SetupChannels build_channels(const ExperimentConfig& config, const DelaySetting& delays);

RatePrediction compose_setup(const ExperimentConfig& config, const DelaySetting& delays);

}  // namespace icsim
