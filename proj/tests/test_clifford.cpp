#include <gtest/gtest.h>

#include "gkp/gkp.hpp"

using namespace gkp;

namespace {

const std::vector<std::string> kOneQubit = {"I", "H", "Hdg", "S", "Sdg", "R", "S^2", "S^4", "H*S*Hdg", "rot(0.37)"};
const std::vector<std::string> kTwoQubit = {"I@I", "H@H", "CZ",       "CZZ",     "CXZ",    "CZY",
                                            "CYY", "CXX", "H@H*CZZ", "R@R*CYY", "S@H*CXY"};

std::vector<GkpCode> test_codes() { return {make_square(), make_hex(), make_rect(1.4)}; }

}  // namespace

TEST(Symplectic, SquareGeneratorsMatchDefinitions) {
  EXPECT_TRUE(sq_hadamard().isApprox(rotation2(kPi / 2), 1e-15));
  const Mat s = symplectic_gate({make_square()}, "S");
  EXPECT_TRUE(s.isApprox(Mat(sq_phase()), 1e-15));
  const Mat cz = symplectic_gate({make_square(), make_square()}, "CZ");
  EXPECT_TRUE(cz.isApprox(sq_cz(), 1e-15));
}

TEST(Symplectic, AllGatesAreSymplecticOnAllCodes) {
  for (const auto& c : test_codes()) {
    for (const auto& g : kOneQubit) EXPECT_TRUE(is_symplectic(symplectic_gate({c}, g))) << c.name << " " << g;
    for (const auto& g : kTwoQubit) EXPECT_TRUE(is_symplectic(symplectic_gate({c, c}, g))) << c.name << " " << g;
  }
  EXPECT_TRUE(is_symplectic(symplectic_gate({make_square(), make_hex()}, "CYZ")));
}

TEST(Symplectic, GateRelations) {
  for (const auto& c : test_codes()) {
    const std::vector<GkpCode> one{c}, two{c, c};
    EXPECT_TRUE(symplectic_gate(one, "H^4").isIdentity(1e-12));
    EXPECT_TRUE(symplectic_gate(one, "H*Hdg").isIdentity(1e-12));
    EXPECT_TRUE(symplectic_gate(one, "S*Sdg").isIdentity(1e-12));
    EXPECT_TRUE(symplectic_gate(one, "R^3").isApprox(Mat::Identity(2, 2), 1e-12) ||
                symplectic_gate(one, "R^3").isApprox(-Mat::Identity(2, 2), 1e-12));
    EXPECT_TRUE(symplectic_gate(one, "R").isApprox(symplectic_gate(one, "S*H"), 1e-14));
    // H^2 is the logical Y up to a displacement, i.e. -1 on phase space.
    EXPECT_TRUE(symplectic_gate(one, "H^2").isApprox(-Mat::Identity(2, 2), 1e-12));
    EXPECT_TRUE(symplectic_gate(two, "CXZ").isApprox(symplectic_gate(two, "H@I*CZZ*Hdg@I"), 1e-12));
  }
}

TEST(Symplectic, RotationIsPhysical) {
  const auto hex = make_hex();
  EXPECT_TRUE(symplectic_gate({hex}, "rot(0.5)").isApprox(Mat(rotation2(0.5)), 1e-15));
}

TEST(GateExpr, ParsesAndRejects) {
  EXPECT_EQ(parse_gate_expr("H@H*CZZ").n_qubits, 2);
  EXPECT_EQ(parse_gate_expr("S^4").factors[0].power, 4);
  EXPECT_THROW(parse_gate_expr(""), parse_error);
  EXPECT_THROW(parse_gate_expr("T"), parse_error);
  EXPECT_THROW(parse_gate_expr("H*CZZ"), parse_error);
  EXPECT_THROW(parse_gate_expr("CQZ"), parse_error);
  EXPECT_THROW(parse_gate_expr("S^x"), parse_error);
  EXPECT_THROW(parse_gate_expr("H@H*I@I@I"), parse_error);
  EXPECT_THROW(symplectic_gate({make_square()}, "CZZ"), validation_error);
}

TEST(DeformedPatch, LatticeDeformationAgreesWithNoiseDeformation) {
  for (const auto& c : {make_square(), make_hex()}) {
    for (const auto& g : kOneQubit) {
      const auto e = parse_gate_expr(g);
      const auto a = deformed_patch_stats({c}, e, PatchMode::naive);
      const auto b = deformed_patch_stats_via_lattice({c}, e);
      EXPECT_NEAR(a.d, b.d, 1e-10) << c.name << " " << g;
      EXPECT_EQ(a.a, b.a) << c.name << " " << g;
    }
    for (const auto& g : kTwoQubit) {
      const auto e = parse_gate_expr(g);
      const auto a = deformed_patch_stats({c, c}, e, PatchMode::naive);
      const auto b = deformed_patch_stats_via_lattice({c, c}, e);
      EXPECT_NEAR(a.d, b.d, 1e-10) << c.name << " " << g;
      EXPECT_EQ(a.a, b.a) << c.name << " " << g;
    }
  }
}

TEST(DeformedPatch, ModifiedPatchRestoresIdentityStats) {
  for (const auto& c : {make_square(), make_hex()}) {
    const auto id = deformed_patch_stats({c}, parse_gate_expr("I"), PatchMode::naive);
    for (const auto& g : kOneQubit) {
      const auto m = deformed_patch_stats({c}, parse_gate_expr(g), PatchMode::modified);
      EXPECT_NEAR(m.d, id.d, 1e-12);
      EXPECT_EQ(m.a, id.a);
    }
  }
}

TEST(DeformedPatch, SquareSPowers) {
  const auto sq = make_square();
  EXPECT_NEAR(deformed_patch_stats({sq}, parse_gate_expr("S"), PatchMode::naive).d, kSqrtPi / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(deformed_patch_stats({sq}, parse_gate_expr("S^2"), PatchMode::naive).d, kSqrtPi / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(deformed_patch_stats({sq}, parse_gate_expr("S^4"), PatchMode::naive).d, kSqrtPi / std::sqrt(17.0), 1e-12);
}

TEST(CliffordGroupTest, HasTwentyFourClosedElements) {
  const auto& g = CliffordGroup::instance();
  ASSERT_EQ(g.size(), 24);
  EXPECT_EQ(g[g.identity()].name, "I");
  for (int a = 0; a < g.size(); ++a) {
    EXPECT_EQ(g.compose(a, g.inverse(a)), g.identity());
    for (int b = 0; b < g.size(); ++b) {
      const int c = g.compose(a, b);
      ASSERT_GE(c, 0);
      // Images compose: (ab) P (ab)^dag = a (b P b^dag) a^dag.
      for (Pauli p : {Pauli::X, Pauli::Z}) {
        const SignedPauli inner = g.conjugate(b, p);
        SignedPauli outer = g.conjugate(a, inner.p);
        outer.sign *= inner.sign;
        EXPECT_EQ(g.conjugate(c, p), outer);
      }
    }
  }
}

TEST(CliffordGroupTest, NamedElements) {
  const auto& g = CliffordGroup::instance();
  EXPECT_EQ(g.conjugate(g.hadamard(), Pauli::X), (SignedPauli{Pauli::Z, 1}));
  EXPECT_EQ(g.conjugate(g.phase(), Pauli::X), (SignedPauli{Pauli::Y, 1}));
  EXPECT_EQ(g.conjugate(g.basis_change(Pauli::Y), Pauli::Z), (SignedPauli{Pauli::Y, 1}));
  EXPECT_EQ(g.conjugate(g.basis_change(Pauli::X), Pauli::Z), (SignedPauli{Pauli::X, 1}));
  EXPECT_THROW(g.find("HHHQ"), parse_error);
  for (int e = 0; e < g.size(); ++e) EXPECT_EQ(g.find(g[e].name), e);
}

TEST(PumpConfig, SquareControlledZZ) {
  const auto sq = make_square();
  const double wa = 2.0 * kPi * 5e9, wb = 2.0 * kPi * 6e9, t = 1e-6;
  const auto c = pump_config(sq, sq, Pauli::Z, Pauli::Z, wa, wb, t, Mixer::three_wave);
  EXPECT_NEAR(c.squeezing.frequency, wa + wb, 1e-3);
  EXPECT_NEAR(c.beamsplitter.frequency, wb - wa, 1e-3);
  EXPECT_NEAR(c.amplitude, 1.0 / (2.0 * t), 1e-6);
  const auto d = pump_config(sq, sq, Pauli::Z, Pauli::Z, wa, wb, t, Mixer::four_wave);
  EXPECT_NEAR(d.squeezing.frequency, (wa + wb) / 2.0, 1e-3);
  const auto y = pump_config(sq, sq, Pauli::Y, Pauli::Z, wa, wb, t, Mixer::three_wave);
  EXPECT_NEAR(y.amplitude, std::sqrt(2.0) / (2.0 * t), 1e-6);
  const double thy = pauli_axis(sq, Pauli::Y).theta, thz = pauli_axis(sq, Pauli::Z).theta;
  EXPECT_NEAR(y.squeezing.phase, wrap_angle(-(thy + thz)), 1e-15);
  EXPECT_NEAR(y.beamsplitter.phase, wrap_angle(-(thy - thz)), 1e-15);
  EXPECT_THROW(pump_config(sq, sq, Pauli::Z, Pauli::Z, wa, wa, t, Mixer::three_wave), validation_error);
  EXPECT_THROW(pump_config(sq, sq, Pauli::Z, Pauli::Z, wa, wb, 0.0, Mixer::three_wave), validation_error);
}
