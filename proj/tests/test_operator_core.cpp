#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "icsim/operator_core.hpp"

using namespace icsim;

namespace {

const cplx I{0.0, 1.0};

struct Modes {
  ModeRegistry reg;
  ModeLabel so1 = reg.add("so1", ModeRole::SignalVacuum, 808e-9);
  ModeLabel so2 = reg.add("so2", ModeRole::SignalVacuum, 808e-9);
  ModeLabel io1 = reg.add("io1", ModeRole::IdlerVacuum, 632e-9);
  ModeLabel anc = reg.add("anc", ModeRole::AncillaVacuum, 632e-9);
  ModeLabel anc2 = reg.add("anc2", ModeRole::AncillaVacuum, 632e-9);
};

OperatorExpansion random_expansion(std::mt19937_64& rng, const Modes& m) {
  std::normal_distribution<double> g;
  std::vector<LadderTerm> terms;
  for (const ModeLabel* mode : {&m.so1, &m.so2, &m.io1}) {
    terms.push_back({*mode, LadderKind::Annihilation, {g(rng), g(rng)}, 0});
    terms.push_back({*mode, LadderKind::Creation, {1e-3 * g(rng), 1e-3 * g(rng)}, 1});
  }
  return OperatorExpansion(terms);
}

}  // namespace

TEST_CASE("mode registry rejects duplicates and bad wavelengths") {
  ModeRegistry reg;
  reg.add("so1", ModeRole::SignalVacuum, 808e-9);
  CHECK(reg.contains("so1"));
  CHECK_THROWS_AS(reg.add("so1", ModeRole::IdlerVacuum, 632e-9), OperatorError);
  CHECK_THROWS_AS(reg.add("x", ModeRole::IdlerVacuum, 0.0), OperatorError);
  CHECK_THROWS_AS(reg.add("y", ModeRole::IdlerVacuum, -1.0), OperatorError);
  CHECK(reg.size() == 1);
}

TEST_CASE("normalization merges terms and drops zeros") {
  Modes m;
  OperatorExpansion x({{m.so1, LadderKind::Annihilation, 0.5, 0},
                       {m.so1, LadderKind::Annihilation, 0.5, 0},
                       {m.io1, LadderKind::Creation, 0.0, 1}});
  REQUIRE(x.terms().size() == 1);
  CHECK(x.coefficient("so1", LadderKind::Annihilation) == cplx{1.0, 0.0});
  CHECK_FALSE(x.mentions("io1"));
}

TEST_CASE("spdc first order") {
  Modes m;
  const cplx k{1e-3, 0.0};
  const auto [s, i] = spdc(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.io1), k);
  CHECK(s.coefficient("so1", LadderKind::Annihilation) == cplx{1.0, 0.0});
  CHECK(std::abs(s.coefficient("io1", LadderKind::Creation) - I * k) < 1e-18);
  CHECK(std::abs(i.coefficient("so1", LadderKind::Creation) - I * k) < 1e-18);
  CHECK(s.max_degree() == 1);
  CHECK(i.max_degree() == 1);

  SUBCASE("commutator deficit is |K|^2") {
    CHECK(std::abs(s.commutator_norm() - (1.0 - std::norm(k))) < 1e-12);
    CHECK(std::abs(i.commutator_norm() - (1.0 - std::norm(k))) < 1e-12);
  }
  SUBCASE("zero gain is identity") {
    const auto [s0, i0] = spdc(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.io1), 0.0);
    CHECK(s0.distance(OperatorExpansion::annihilator(m.so1)) == 0.0);
    CHECK(i0.distance(OperatorExpansion::annihilator(m.io1)) == 0.0);
  }
  SUBCASE("gain outside perturbative range") {
    CHECK_THROWS_AS(spdc(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.io1), 0.1),
                    OperatorError);
    CHECK_THROWS_AS(spdc(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.io1), 0.2 * I),
                    OperatorError);
  }
}

TEST_CASE("cascaded spdc truncated to first order") {
  Modes m;
  const double k1 = 1e-3;
  const double k2 = 2e-3;
  const double phi = 0.37;
  const cplx k2p = std::polar(k2, phi);
  const auto [s1, i1] = spdc(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.io1), k1);
  const auto [s2, i2] = spdc(OperatorExpansion::annihilator(m.so2), i1, k2p);

  const OperatorExpansion s2t = truncate(s2, 1);
  const OperatorExpansion s2_expected =
      OperatorExpansion::annihilator(m.so2) + (I * k2p) * OperatorExpansion::creator(m.io1).raise_degree(1);
  CHECK(s2t.distance(s2_expected) < 1e-18);

  const OperatorExpansion i2t = truncate(i2, 1);
  const OperatorExpansion i2_expected = OperatorExpansion::annihilator(m.io1) +
                                        (I * k1) * OperatorExpansion::creator(m.so1).raise_degree(1) +
                                        (I * k2p) * OperatorExpansion::creator(m.so2).raise_degree(1);
  CHECK(i2t.distance(i2_expected) < 1e-18);

  // The dropped second-order piece of s2 is K2 K1^* a_so1.
  CHECK(s2.max_degree() == 2);
  CHECK(std::abs(s2.coefficient("so1", LadderKind::Annihilation) - (I * k2p) * std::conj(I * k1)) < 1e-18);
  CHECK(truncate(s2, 10).distance(s2) == 0.0);
  CHECK(truncate(OperatorExpansion::annihilator(m.so1), 0).distance(OperatorExpansion::annihilator(m.so1)) == 0.0);
  CHECK_THROWS(truncate(s2, -1));
}

TEST_CASE("phase delay") {
  Modes m;
  const auto [s, i] = spdc(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.io1), 1e-3);
  CHECK(phase_delay(s, 808e-9, 808e-9).distance(s) == 0.0);
  CHECK(phase_delay(s, 202e-9, 808e-9).distance(I * s) == 0.0);
  CHECK(phase_delay(s, 404e-9, 808e-9).distance(-1.0 * s) == 0.0);
  CHECK(phase_delay(s, 0.0, 808e-9).distance(s) == 0.0);

  const double dx = 123.4e-9;
  const OperatorExpansion d = phase_delay(s, dx, 808e-9);
  CHECK(d.distance(std::polar(1.0, 2.0 * kPi * dx / 808e-9) * s) < 1e-15);
  CHECK(std::abs(d.commutator_norm() - s.commutator_norm()) < 1e-15);

  CHECK_THROWS_AS(phase_delay(s, dx, 0.0), OperatorError);
  CHECK_THROWS_AS(phase_delay(s, dx, -808e-9), OperatorError);
}

TEST_CASE("beam splitter") {
  Modes m;
  const auto bs = BeamSplitterParams::from_reflectivity(0.5);
  const double h = std::sqrt(0.5);
  CHECK(std::abs(bs.t - h) < 1e-15);
  CHECK(std::abs(bs.r - h) < 1e-15);

  const cplx k = 1e-3;
  const auto [s1, i1] = spdc(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.io1), k);
  const auto [s2, i2] = spdc(OperatorExpansion::annihilator(m.so2), i1, k);
  const OperatorExpansion s1d = phase_delay(s1, 100e-9, 808e-9);
  const auto [out1, out2] = beam_splitter(truncate(s2, 1), s1d, bs);
  CHECK(out1.distance(h * truncate(s2, 1) + h * s1d) < 1e-18);
  CHECK(out2.distance(h * s1d - h * truncate(s2, 1)) < 1e-18);

  SUBCASE("transparent splitter") {
    const auto [a, b] = beam_splitter(s1, OperatorExpansion(), BeamSplitterParams{1.0, 0.0});
    CHECK(a.distance(s1) == 0.0);
    CHECK(b.empty());
  }
  SUBCASE("commutator conserved over both ports") {
    const double before = truncate(s2, 1).commutator_norm() + s1d.commutator_norm();
    CHECK(std::abs(out1.commutator_norm() + out2.commutator_norm() - before) < 1e-12);
  }
  SUBCASE("orthonormal inputs keep total weight") {
    const auto [a, b] = beam_splitter(OperatorExpansion::annihilator(m.so1), OperatorExpansion::annihilator(m.so2),
                                      BeamSplitterParams::from_reflectivity(0.3));
    CHECK(std::abs(a.commutator_norm() + b.commutator_norm() - 2.0) < 1e-12);
  }
  SUBCASE("non-unitary splitter rejected") {
    CHECK_THROWS_AS(beam_splitter(s1, s1d, BeamSplitterParams{0.8, 0.8}), OperatorError);
    CHECK_THROWS_AS(BeamSplitterParams::from_reflectivity(1.5), OperatorError);
  }
}

TEST_CASE("attenuation") {
  Modes m;
  const auto io = OperatorExpansion::annihilator(m.io1);
  CHECK(attenuate(io, 1.0, m.anc).distance(io) == 0.0);
  CHECK(attenuate(io, 0.0, m.anc).distance(OperatorExpansion::annihilator(m.anc)) == 0.0);

  const OperatorExpansion x = attenuate(io, 0.7, m.anc);
  CHECK(std::abs(x.coefficient("io1", LadderKind::Annihilation) - 0.7) < 1e-15);
  CHECK(std::abs(x.coefficient("anc", LadderKind::Annihilation) - std::sqrt(0.51)) < 1e-15);
  CHECK(std::abs(x.commutator_norm() - 1.0) < 1e-12);

  const auto [s, i] = spdc(OperatorExpansion::annihilator(m.so1), io, 1e-3);
  // Unit commutator is kept; in general C -> T^2 C + 1 - T^2.
  CHECK(std::abs(attenuate(i, 0.3, m.anc).commutator_norm() - (0.09 * i.commutator_norm() + 0.91)) < 1e-12);

  CHECK_THROWS_AS(attenuate(io, 1.2, m.anc), OperatorError);
  CHECK_THROWS_AS(attenuate(io, -0.1, m.anc), OperatorError);
  CHECK_THROWS_AS(attenuate(x, 0.5, m.anc), OperatorError);  // ancilla reused
  CHECK_THROWS_AS(attenuate(io, 0.5, m.so2), OperatorError);  // not an ancilla
  CHECK_NOTHROW(attenuate(x, 0.5, m.anc2));
}

TEST_CASE("crystal parameters") {
  const auto c = CrystalParams::from_pump(1e-4, cplx{3.0, 4.0});
  CHECK(std::abs(c.gain - cplx{3e-4, 4e-4}) < 1e-18);
  CHECK_THROWS_AS(CrystalParams::from_pump(1.0, 0.1), OperatorError);
}

TEST_CASE("delay phases") {
  const DelaySetting d{355e-9, 404e-9};
  CHECK(std::abs(d.pump_phase(355e-9) - 2.0 * kPi) < 1e-12);
  CHECK(std::abs(d.signal_phase(808e-9) - kPi) < 1e-12);
}

TEST_CASE("randomized invariants: dagger, linearity, commutator") {
  Modes m;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const OperatorExpansion x = random_expansion(rng, m);
    const OperatorExpansion y = random_expansion(rng, m);
    const cplx a{u(rng), u(rng)};
    const cplx b{u(rng), u(rng)};

    CHECK(x.dagger().dagger().distance(x) == 0.0);
    CHECK(x.dagger().commutator_norm() == doctest::Approx(-x.commutator_norm()).epsilon(1e-12));

    const cplx k{1e-3 * u(rng), 1e-3 * u(rng)};
    const auto lin = spdc(a * x + b * y, OperatorExpansion::annihilator(m.io1), k).first;
    const auto px = spdc(x, OperatorExpansion::annihilator(m.io1), k).first;
    const auto py = spdc(y, OperatorExpansion::annihilator(m.io1), k).first;
    CHECK(lin.distance(a * px + b * py - (a + b - 1.0) * OperatorExpansion::annihilator(m.io1).dagger().raise_degree(1) *
                                            (I * k)) < 1e-12);

    const double dx = 1e-6 * u(rng);
    CHECK(phase_delay(a * x + b * y, dx, 808e-9).distance(a * phase_delay(x, dx, 808e-9) +
                                                          b * phase_delay(y, dx, 808e-9)) < 1e-12);
    const OperatorExpansion dly = phase_delay(x, dx, 808e-9);
    CHECK(std::abs(dly.commutator_norm() - x.commutator_norm()) < 1e-12);

    const double rr = 0.5 * (u(rng) + 1.0);
    const auto bs = BeamSplitterParams::from_reflectivity(rr);
    const auto [o1, o2] = beam_splitter(x, y, bs);
    CHECK(o1.commutator_norm() + o2.commutator_norm() ==
          doctest::Approx(x.commutator_norm() + y.commutator_norm()).epsilon(1e-12));

    const double tr = 0.5 * (u(rng) + 1.0);
    const OperatorExpansion att = attenuate(x, tr, m.anc);
    CHECK(att.commutator_norm() == doctest::Approx(tr * tr * x.commutator_norm() + 1.0 - tr * tr).epsilon(1e-12));
  }
}
