#include <gtest/gtest.h>

#include "gkp/gkp.hpp"

using namespace gkp;

namespace {

PatchStats square_stats() { return patch_stats(code_lattice({make_square()}), Metric::identity(2)); }

ChannelChain loss_chain(double db, double gamma, double sigma_d2 = 0.0) {
  ChannelChain c;
  c.delta = std::sqrt(db_to_delta2(db));
  c.gaussian = PhaseCovariantChannel::loss(gamma);
  c.sigma_d = std::sqrt(sigma_d2);
  return c;
}

}  // namespace

TEST(Channels, CompletePositivity) {
  for (double g : {0.0, 0.01, 0.5, 1.0}) EXPECT_TRUE(PhaseCovariantChannel::loss(g).is_cp());
  for (double g : {1.0, 1.5, 10.0}) EXPECT_TRUE(PhaseCovariantChannel::gain(g).is_cp());
  EXPECT_FALSE((PhaseCovariantChannel{0.5, 0.1}).is_cp());
  EXPECT_THROW((PhaseCovariantChannel{2.0, 0.5}).validate(), validation_error);
  EXPECT_THROW(PhaseCovariantChannel::loss(1.5), validation_error);
  EXPECT_THROW(PhaseCovariantChannel::gain(0.5), validation_error);
  EXPECT_THROW(PhaseCovariantChannel::displacement(-1.0), validation_error);
}

TEST(Channels, CompositionStaysCpAndLossGainIsDisplacement) {
  for (double g : {0.001, 0.01, 0.2}) {
    const auto c = channel_compose({PhaseCovariantChannel::loss(g), PhaseCovariantChannel::gain(1.0 / (1.0 - g))});
    EXPECT_NEAR(c.tau, 1.0, 1e-14);
    EXPECT_NEAR(c.nu, g / (1.0 - g), 1e-14);
    const auto d = channel_compose({PhaseCovariantChannel::gain(1.3), PhaseCovariantChannel::loss(g),
                                    PhaseCovariantChannel::displacement(0.01)});
    EXPECT_TRUE(d.is_cp());
  }
}

TEST(Twirl, LossVarianceMatchesOracle) {
  EXPECT_NEAR(loss_sigma2(std::sqrt(db_to_delta2(10.0)), 0.01), 0.054834002879355864, 1e-15);
  const auto v = twirl_variance(loss_chain(10.0, 0.01));
  EXPECT_NEAR(v.sigma2, 0.054834002879355864, 1e-15);
  EXPECT_NEAR(v.sigma2, v.sigma_g2_exact, 1e-16);
}

TEST(Twirl, EnvelopeOnlyIsTanhHalf) {
  ChannelChain c;
  c.delta = 0.3;
  EXPECT_NEAR(twirl_variance(c).sigma2, std::tanh(0.045), 1e-16);
}

TEST(Twirl, RotationApproximationAgreesForSmallParameters) {
  ChannelChain c = loss_chain(12.0, 0.001);
  c.phi = 0.01;
  const auto v = twirl_variance(c);
  EXPECT_NEAR(v.sigma2_approx / v.sigma2, 1.0, 0.02);
}

TEST(Estimator, AverageAndEntanglementInfidelity) {
  EXPECT_DOUBLE_EQ(avg_from_entanglement(0.3, 1), 0.2);
  EXPECT_DOUBLE_EQ(avg_from_entanglement(0.5, 2), 0.4);
  const auto r = logical_infidelity(0.05, square_stats(), 1, TailMode::leading);
  EXPECT_NEAR(r.avg_gate_infidelity, 2.0 / 3.0 * r.entanglement_infidelity, 1e-18);
}

TEST(Dephasing, CriticalValuesMatchOracle) {
  const double d = kSqrtPi;
  EXPECT_NEAR(critical_dephasing(loss_chain(10.0, 0.01), d).sigma_d2, 0.00077383296956075631, 1e-17);
  EXPECT_NEAR(critical_dephasing(loss_chain(12.0, 0.01), d).sigma_d2, 0.000216961821261691, 1e-17);
}

TEST(Dephasing, NumericIntegralMatchesOracle) {
  const auto r = dephasing_infidelity(loss_chain(10.0, 0.01, 0.006), square_stats(), 1, DephasingMethod::numeric);
  EXPECT_NEAR(r.entanglement_infidelity / 0.01184339524125361, 1.0, 1e-9);
  EXPECT_NEAR(r.avg_gate_infidelity / 0.0078955968275024065, 1.0, 1e-9);
  EXPECT_EQ(r.regime, Regime::numeric);
}

TEST(Dephasing, NumericIntegralIsConverged) {
  for (double db : {8.0, 10.0, 12.0, 14.0}) {
    for (double sd2 : {1e-4, 1e-3, 6e-3}) {
      const auto c = loss_chain(db, 0.01, sd2);
      const double a = dephasing_infidelity(c, square_stats(), 1, DephasingMethod::numeric).entanglement_infidelity;
      const double b =
          dephasing_infidelity(c, square_stats(), 1, DephasingMethod::numeric, 5e-15, 5e-11).entanglement_infidelity;
      EXPECT_LT(std::abs(a - b) / a, 1e-8) << db << " " << sd2;
    }
  }
}

TEST(Dephasing, ZeroDephasingIsGaussianPath) {
  const auto c = loss_chain(11.0, 0.01);
  const auto r = dephasing_infidelity(c, square_stats(), 1, DephasingMethod::autoselect);
  const auto g = logical_infidelity(twirl_variance(c).sigma2, square_stats(), 1, TailMode::leading);
  EXPECT_DOUBLE_EQ(r.entanglement_infidelity, g.entanglement_infidelity);
}

TEST(Dephasing, RegimeFormulasTrackNumericAwayFromGuardBand) {
  const auto st = square_stats();
  for (double db = 8.0; db <= 14.0; db += 0.5) {
    auto c = loss_chain(db, 0.01);
    const double sc = critical_dephasing(c, st.d).sigma_d;
    for (double f : {0.1, 0.25, 0.4, 2.5, 3.0, 4.0}) {
      c.sigma_d = f * sc;
      const double num = dephasing_infidelity(c, st, 1, DephasingMethod::numeric).entanglement_infidelity;
      const auto an = dephasing_infidelity(c, st, 1, DephasingMethod::autoselect);
      EXPECT_EQ(an.regime, f < 1.0 ? Regime::sub : Regime::super);
      EXPECT_LT(std::abs(an.entanglement_infidelity / num - 1.0), 0.25) << db << " x" << f;
    }
  }
}

TEST(Dephasing, GuardBandRoutesToNumericAndFormulasCheckDomain) {
  auto c = loss_chain(10.0, 0.01);
  const double sc = critical_dephasing(c, kSqrtPi).sigma_d;
  c.sigma_d = sc;
  EXPECT_EQ(dephasing_infidelity(c, square_stats(), 1, DephasingMethod::autoselect).regime, Regime::numeric);
  EXPECT_THROW(dephasing_infidelity(c, square_stats(), 1, DephasingMethod::sub), domain_error);
  EXPECT_THROW(dephasing_infidelity(c, square_stats(), 1, DephasingMethod::super), domain_error);
  c.sigma_d = 0.9 * sc;
  EXPECT_TRUE(dephasing_infidelity(c, square_stats(), 1, DephasingMethod::sub).validity_warning);
  c.sigma_d = sc;
  const double crit = dephasing_infidelity(c, square_stats(), 1, DephasingMethod::critical).entanglement_infidelity;
  const double num = dephasing_infidelity(c, square_stats(), 1, DephasingMethod::numeric).entanglement_infidelity;
  EXPECT_LT(std::abs(crit / num - 1.0), 0.5);
}

TEST(Optimizers, NumericDeltaOptimumNearNinePointThree) {
  const auto o = delta_numeric(0.01, std::sqrt(0.006), square_stats());
  EXPECT_NEAR(o.x, 9.3, 0.3);
}

TEST(Optimizers, LossOptimumIsStationary) {
  for (double g : {0.001, 0.01, 0.05}) {
    const auto o = delta_for_loss(g);
    auto f = [g](double d2) { return loss_sigma2(std::sqrt(d2), g); };
    const double h = 1e-4 * o.x;
    const double deriv = (f(o.x + h) - f(o.x - h)) / (2.0 * h);
    EXPECT_LT(std::abs(deriv), 1e-8) << g;
    EXPECT_LT(o.value, f(1.2 * o.x));
    EXPECT_LT(o.value, f(0.8 * o.x));
  }
  EXPECT_NEAR(delta_for_loss(0.01).x, 0.0050251679267507206, 1e-17);
}

TEST(Optimizers, GainLimits) {
  for (double g : {0.001, 0.01, 0.1}) {
    EXPECT_NEAR(gain_for_loss(1e-5, g).x, 1.0 / (1.0 - g), 1e-8);
    EXPECT_EQ(gain_for_loss(std::sqrt(0.6 * g), g).x, 1.0);
  }
  // Gain never makes the twirl variance worse than plain loss.
  for (double db : {10.0, 13.0, 16.0}) {
    const double dl = std::sqrt(db_to_delta2(db));
    EXPECT_LE(gain_for_loss(dl, 0.01).value, loss_sigma2(dl, 0.01) + 1e-15);
  }
}

TEST(Optimizers, DephasingDelta) {
  const auto o = delta_for_dephasing(kSqrtPi, 0.05);
  EXPECT_NEAR(o.x, std::cbrt(kSqrtPi * 0.05) / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(delta_for_dephasing(0.0, 0.1), validation_error);
}

TEST(Loss, ExactSigmaEstimatorMatchesQuadratureOracle) {
  const auto st = square_stats();
  const auto lat = code_lattice({make_square()});
  for (double g : {0.001, 0.01}) {
    for (double db = 10.0; db <= 14.0; db += 1.0) {
      const double dl = std::sqrt(db_to_delta2(db));
      const auto e = loss_linear_expansion(st, dl, g);
      const double s2 = loss_sigma2(dl, g);
      const auto q = quad_tail_2d(lat, Metric::identity(2), s2 * Mat::Identity(2, 2));
      EXPECT_LT(std::abs(e.exact_sigma / q.mass - 1.0), 0.05) << g << " " << db;
      EXPECT_DOUBLE_EQ(e.trivial, g / 2.0);
    }
  }
}
