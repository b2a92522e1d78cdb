#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace icsim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
// Largest parametric gain magnitude accepted by the linearised transformations.
inline constexpr double kMaxPerturbativeGain = 0.1;

class OperatorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ModeRole { SignalVacuum, IdlerVacuum, AncillaVacuum };
enum class LadderKind { Annihilation, Creation };

struct ModeLabel {
  std::string name;
  ModeRole role = ModeRole::SignalVacuum;
  double center_wavelength = 0.0;  // m

  friend bool operator==(const ModeLabel& a, const ModeLabel& b) {
    return a.name == b.name;
  }
};

/// Hands out mode labels and enforces unique names within one experiment.
class ModeRegistry {
 public:
  ModeLabel add(std::string name, ModeRole role, double center_wavelength);
  bool contains(const std::string& name) const;
  std::size_t size() const { return modes_.size(); }

 private:
  std::map<std::string, ModeLabel> modes_;
};

struct LadderTerm {
  ModeLabel mode;
  LadderKind kind = LadderKind::Annihilation;
  cplx coefficient{1.0, 0.0};
  int gain_degree = 0;
};

/// Linear combination of ladder operators over vacuum modes: the
/// Heisenberg-picture field of one optical channel.
///
/// Terms are kept normalized: one entry per (mode, kind, gain_degree),
/// ordered by mode name, kind and degree. Terms of the same (mode, kind)
/// but different gain degree stay separate so that truncate() remains exact;
/// coefficient() and commutator_norm() sum over degrees.
class OperatorExpansion {
 public:
  OperatorExpansion() = default;
  explicit OperatorExpansion(std::vector<LadderTerm> terms);

  static OperatorExpansion annihilator(const ModeLabel& mode);
  static OperatorExpansion creator(const ModeLabel& mode);

  const std::vector<LadderTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Total coefficient of (mode, kind), summed over gain degrees.
  cplx coefficient(const std::string& mode, LadderKind kind) const;
  bool mentions(const std::string& mode) const;
  int max_degree() const;

  /// Coefficients summed per (mode, kind), degrees merged.
  std::vector<LadderTerm> collapsed() const;

  OperatorExpansion dagger() const;

  /// C(x) = sum |alpha|^2 over annihilators minus sum |beta|^2 over creators,
  /// i.e. the vacuum commutator [x, x^dagger].
  double commutator_norm() const;

  /// Adds `shift` to every term's gain degree.
  OperatorExpansion raise_degree(int shift) const;

  OperatorExpansion& operator+=(const OperatorExpansion& other);
  OperatorExpansion& operator-=(const OperatorExpansion& other);
  OperatorExpansion& operator*=(cplx factor);

  friend OperatorExpansion operator+(OperatorExpansion a, const OperatorExpansion& b) { return a += b; }
  friend OperatorExpansion operator-(OperatorExpansion a, const OperatorExpansion& b) { return a -= b; }
  friend OperatorExpansion operator*(OperatorExpansion a, cplx f) { return a *= f; }
  friend OperatorExpansion operator*(cplx f, OperatorExpansion a) { return a *= f; }

  /// Max coefficient difference over all (mode, kind, degree) keys.
  double distance(const OperatorExpansion& other) const;

 private:
  void normalize();
  std::vector<LadderTerm> terms_;
};

struct CrystalParams {
  cplx gain;

  /// K = gamma * A_p, checked against the perturbative bound.
  static CrystalParams from_pump(double conversion_efficiency, cplx pump_amplitude);
  void validate() const;
};

struct BeamSplitterParams {
  cplx t{1.0, 0.0};
  cplx r{0.0, 0.0};

  /// Real splitter with power reflectivity R.
  static BeamSplitterParams from_reflectivity(double reflectivity);
  void validate() const;
};

struct DelaySetting {
  double delta_x_p = 0.0;  // pump path difference, m
  double delta_x_s = 0.0;  // signal path difference, m

  double pump_phase(double pump_wavelength) const;
  double signal_phase(double signal_wavelength) const;
};

/// Single-pass parametric down-conversion, first order in the gain:
/// s' = s + iK idler^dagger, i' = i + iK signal^dagger. New terms carry
/// one extra gain degree.
std::pair<OperatorExpansion, OperatorExpansion> spdc(const OperatorExpansion& signal_in,
                                                     const OperatorExpansion& idler_in,
                                                     cplx gain);

OperatorExpansion phase_delay(const OperatorExpansion& x, double delta_x, double wavelength);

/// out1 = t a + r b, out2 = conj(t) b - conj(r) a.
std::pair<OperatorExpansion, OperatorExpansion> beam_splitter(const OperatorExpansion& a,
                                                              const OperatorExpansion& b,
                                                              const BeamSplitterParams& bs);

/// Amplitude transmission T with the lost amplitude replaced by a fresh
/// vacuum ancilla: x' = T x + sqrt(1 - T^2) a_anc.
OperatorExpansion attenuate(const OperatorExpansion& x, double transmission, const ModeLabel& ancilla);

OperatorExpansion truncate(const OperatorExpansion& x, int max_degree);

}  // namespace icsim
