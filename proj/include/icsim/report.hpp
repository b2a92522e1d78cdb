#pragma once

#include <string>
#include <vector>

#include "icsim/config.hpp"

namespace icsim {

// Pump coherence length quoted with the setup; kept for comparison only.
inline constexpr double kQuotedPumpCoherenceLength = 1.4e-3;  // m
inline constexpr double kDoublePairLimit = 1e-2;

struct LowGainCheck {
  double pair_rate = 0.0;    // 1/s
  double probability = 0.0;  // P(>= 2 pairs in one window)
  bool violated = false;
};

LowGainCheck low_gain_check(const ExperimentConfig& config);

/// Human-readable summary of a configuration and its predictions.
std::string report(const ExperimentConfig& config);

}  // namespace icsim
