#include "icsim/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace icsim {

namespace {

constexpr cplx kI{0.0, 1.0};

bool term_less(const LadderTerm& a, const LadderTerm& b) {
  return std::tie(a.mode.name, a.kind, a.gain_degree) < std::tie(b.mode.name, b.kind, b.gain_degree);
}

bool same_key(const LadderTerm& a, const LadderTerm& b) {
  return a.mode.name == b.mode.name && a.kind == b.kind && a.gain_degree == b.gain_degree;
}

void require_finite(cplx c, const char* what) {
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
    throw OperatorError(std::string(what) + ": non-finite coefficient");
  }
}

}  // namespace

ModeLabel ModeRegistry::add(std::string name, ModeRole role, double center_wavelength) {
  if (!(center_wavelength > 0.0)) {
    throw OperatorError("mode " + name + ": center wavelength must be positive");
  }
  if (modes_.count(name) != 0) {
    throw OperatorError("mode " + name + " already registered");
  }
  ModeLabel label{name, role, center_wavelength};
  modes_.emplace(std::move(name), label);
  return label;
}

bool ModeRegistry::contains(const std::string& name) const { return modes_.count(name) != 0; }

OperatorExpansion::OperatorExpansion(std::vector<LadderTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    require_finite(t.coefficient, "OperatorExpansion");
    if (t.gain_degree < 0) throw OperatorError("negative gain degree");
  }
  normalize();
}

OperatorExpansion OperatorExpansion::annihilator(const ModeLabel& mode) {
  return OperatorExpansion({LadderTerm{mode, LadderKind::Annihilation, 1.0, 0}});
}

OperatorExpansion OperatorExpansion::creator(const ModeLabel& mode) {
  return OperatorExpansion({LadderTerm{mode, LadderKind::Creation, 1.0, 0}});
}

void OperatorExpansion::normalize() {
  std::stable_sort(terms_.begin(), terms_.end(), term_less);
  std::vector<LadderTerm> merged;
  merged.reserve(terms_.size());
  for (auto& t : terms_) {
    if (!merged.empty() && same_key(merged.back(), t)) {
      merged.back().coefficient += t.coefficient;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const LadderTerm& t) { return t.coefficient == cplx{0.0, 0.0}; });
  terms_ = std::move(merged);
}

cplx OperatorExpansion::coefficient(const std::string& mode, LadderKind kind) const {
  cplx sum{0.0, 0.0};
  for (const auto& t : terms_) {
    if (t.mode.name == mode && t.kind == kind) sum += t.coefficient;
  }
  return sum;
}

bool OperatorExpansion::mentions(const std::string& mode) const {
  return std::any_of(terms_.begin(), terms_.end(), [&](const LadderTerm& t) { return t.mode.name == mode; });
}

int OperatorExpansion::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.gain_degree);
  return d;
}

std::vector<LadderTerm> OperatorExpansion::collapsed() const {
  std::vector<LadderTerm> out;
  for (const auto& t : terms_) {
    if (!out.empty() && out.back().mode.name == t.mode.name && out.back().kind == t.kind) {
      out.back().coefficient += t.coefficient;
      out.back().gain_degree = std::min(out.back().gain_degree, t.gain_degree);
    } else {
      out.push_back(t);
    }
  }
  return out;
}

OperatorExpansion OperatorExpansion::dagger() const {
  std::vector<LadderTerm> out = terms_;
  for (auto& t : out) {
    t.kind = t.kind == LadderKind::Annihilation ? LadderKind::Creation : LadderKind::Annihilation;
    t.coefficient = std::conj(t.coefficient);
  }
  return OperatorExpansion(std::move(out));
}

double OperatorExpansion::commutator_norm() const {
  double c = 0.0;
  for (const auto& t : collapsed()) {
    const double w = std::norm(t.coefficient);
    c += t.kind == LadderKind::Annihilation ? w : -w;
  }
  return c;
}

OperatorExpansion OperatorExpansion::raise_degree(int shift) const {
  std::vector<LadderTerm> out = terms_;
  for (auto& t : out) t.gain_degree += shift;
  return OperatorExpansion(std::move(out));
}

OperatorExpansion& OperatorExpansion::operator+=(const OperatorExpansion& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  normalize();
  return *this;
}

OperatorExpansion& OperatorExpansion::operator-=(const OperatorExpansion& other) {
  for (auto t : other.terms_) {
    t.coefficient = -t.coefficient;
    terms_.push_back(std::move(t));
  }
  normalize();
  return *this;
}

OperatorExpansion& OperatorExpansion::operator*=(cplx factor) {
  require_finite(factor, "scale");
  for (auto& t : terms_) t.coefficient *= factor;
  normalize();
  return *this;
}

double OperatorExpansion::distance(const OperatorExpansion& other) const {
  const OperatorExpansion diff = *this - other;
  double d = 0.0;
  for (const auto& t : diff.terms_) d = std::max(d, std::abs(t.coefficient));
  return d;
}

CrystalParams CrystalParams::from_pump(double conversion_efficiency, cplx pump_amplitude) {
  CrystalParams p{conversion_efficiency * pump_amplitude};
  p.validate();
  return p;
}

void CrystalParams::validate() const {
  require_finite(gain, "crystal gain");
  if (!(std::abs(gain) < kMaxPerturbativeGain)) {
    throw OperatorError("crystal gain |K| = " + std::to_string(std::abs(gain)) +
                        " outside perturbative range (< 0.1)");
  }
}

BeamSplitterParams BeamSplitterParams::from_reflectivity(double reflectivity) {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) {
    throw OperatorError("beam splitter reflectivity out of [0,1]");
  }
  return BeamSplitterParams{std::sqrt(1.0 - reflectivity), std::sqrt(reflectivity)};
}

void BeamSplitterParams::validate() const {
  require_finite(t, "beam splitter t");
  require_finite(r, "beam splitter r");
  if (std::abs(std::norm(t) + std::norm(r) - 1.0) > 1e-12) {
    throw OperatorError("beam splitter is not unitary: |t|^2 + |r|^2 != 1");
  }
}

double DelaySetting::pump_phase(double pump_wavelength) const {
  return 2.0 * kPi * delta_x_p / pump_wavelength;
}

double DelaySetting::signal_phase(double signal_wavelength) const {
  return 2.0 * kPi * delta_x_s / signal_wavelength;
}

std::pair<OperatorExpansion, OperatorExpansion> spdc(const OperatorExpansion& signal_in,
                                                     const OperatorExpansion& idler_in,
                                                     cplx gain) {
  CrystalParams{gain}.validate();
  if (gain == cplx{0.0, 0.0}) return {signal_in, idler_in};
  const cplx ik = kI * gain;
  OperatorExpansion signal_out = signal_in + ik * idler_in.dagger().raise_degree(1);
  OperatorExpansion idler_out = idler_in + ik * signal_in.dagger().raise_degree(1);
  return {std::move(signal_out), std::move(idler_out)};
}

OperatorExpansion phase_delay(const OperatorExpansion& x, double delta_x, double wavelength) {
  if (!(wavelength > 0.0)) throw OperatorError("phase_delay: wavelength must be positive");
  if (!std::isfinite(delta_x)) throw OperatorError("phase_delay: non-finite delay");
  if (delta_x == 0.0) return x;
  // Reduce to one wave before forming the phase so that whole-wave delays
  // come back as exact identities.
  const double waves = std::remainder(delta_x / wavelength, 1.0);
  cplx factor;
  if (waves == 0.0) {
    factor = 1.0;
  } else if (waves == 0.25) {
    factor = kI;
  } else if (waves == -0.25) {
    factor = -kI;
  } else if (waves == 0.5 || waves == -0.5) {
    factor = -1.0;
  } else {
    factor = std::polar(1.0, 2.0 * kPi * waves);
  }
  return x * factor;
}

std::pair<OperatorExpansion, OperatorExpansion> beam_splitter(const OperatorExpansion& a,
                                                              const OperatorExpansion& b,
                                                              const BeamSplitterParams& bs) {
  bs.validate();
  OperatorExpansion out1 = bs.t * a + bs.r * b;
  OperatorExpansion out2 = std::conj(bs.t) * b - std::conj(bs.r) * a;
  return {std::move(out1), std::move(out2)};
}

OperatorExpansion attenuate(const OperatorExpansion& x, double transmission, const ModeLabel& ancilla) {
  if (!(transmission >= 0.0 && transmission <= 1.0)) {
    throw OperatorError("attenuate: transmission out of [0,1]");
  }
  if (ancilla.role != ModeRole::AncillaVacuum) {
    throw OperatorError("attenuate: mode " + ancilla.name + " is not an ancilla");
  }
  if (x.mentions(ancilla.name)) {
    throw OperatorError("attenuate: ancilla " + ancilla.name + " already in use");
  }
  if (transmission == 1.0) return x;
  const double leak = std::sqrt((1.0 - transmission) * (1.0 + transmission));
  OperatorExpansion out = x * cplx{transmission, 0.0};
  out += leak * OperatorExpansion::annihilator(ancilla);
  return out;
}

OperatorExpansion truncate(const OperatorExpansion& x, int max_degree) {
  if (max_degree < 0) throw OperatorError("truncate: negative degree");
  std::vector<LadderTerm> kept;
  for (const auto& t : x.terms()) {
    if (t.gain_degree <= max_degree) kept.push_back(t);
  }
  return OperatorExpansion(std::move(kept));
}

}  // namespace icsim
