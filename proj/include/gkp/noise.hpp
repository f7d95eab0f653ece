#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gkp/errors.hpp"
#include "gkp/geometry.hpp"
#include "gkp/numerics.hpp"

namespace gkp {

// Phase-covariant Gaussian channel: means scale by tau, quadrature variances gain nu.
struct PhaseCovariantChannel {
  double tau = 1.0;
  double nu = 0.0;

  bool is_cp(double tol = 1e-12) const {
    return tau >= 0.0 && nu >= std::abs(tau * tau - 1.0) / 2.0 - tol;
  }
  void validate() const {
    if (!(tau >= 0.0) || !(nu >= 0.0)) throw validation_error("channel needs tau >= 0, nu >= 0");
    if (!is_cp()) {
      throw validation_error("channel violates nu >= |tau^2 - 1|/2 (tau=" + std::to_string(tau) +
                             ", nu=" + std::to_string(nu) + ")");
    }
  }

  static PhaseCovariantChannel identity() { return {1.0, 0.0}; }
  static PhaseCovariantChannel loss(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw validation_error("loss gamma must be in [0, 1]");
    return {std::sqrt(1.0 - gamma), gamma / 2.0};
  }
  static PhaseCovariantChannel gain(double g) {
    if (!(g >= 1.0)) throw validation_error("gain must be >= 1");
    return {std::sqrt(g), (g - 1.0) / 2.0};
  }
  static PhaseCovariantChannel displacement(double sigma_g2) {
    if (!(sigma_g2 >= 0.0)) throw validation_error("displacement variance must be >= 0");
    return {1.0, sigma_g2};
  }
};

// Left-to-right composition: parts[0] acts first.
inline PhaseCovariantChannel channel_compose(const std::vector<PhaseCovariantChannel>& parts) {
  PhaseCovariantChannel out = PhaseCovariantChannel::identity();
  for (const auto& p : parts) {
    p.validate();
    out = {out.tau * p.tau, p.tau * p.tau * out.nu + p.nu};
  }
  // Composition of CP channels is CP; a failure here means a logic error upstream.
  if (!out.is_cp(1e-10)) throw domain_error("composed channel lost complete positivity");
  return out;
}

struct ChannelChain {
  double delta = 0.0;  // envelope Delta
  PhaseCovariantChannel gaussian;
  double phi = 0.0;      // static rotation
  double sigma_d = 0.0;  // dephasing standard deviation

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw validation_error("envelope delta must be in (0, 1)");
    gaussian.validate();
    if (!(sigma_d >= 0.0)) throw validation_error("sigma_d must be >= 0");
  }
};

struct TwirlVariance {
  double sigma2 = 0.0;         // exact hyperbolic form
  double sigma2_approx = 0.0;  // small-parameter expansion
  double sigma_g2 = 0.0;       // small-parameter phi = 0 value, used by the dephasing formulas
  double sigma_g2_exact = 0.0; // exact phi = 0 value
};

inline double twirl_sigma2_exact(double delta2, double tau, double nu, double phi) {
  const double s = std::sin(phi / 2.0);
  return tau * std::tanh(delta2 / 2.0) + nu + (1.0 - tau) * (1.0 - tau) / (2.0 * std::tanh(delta2)) +
         2.0 * tau * s * s / std::sinh(delta2);
}

inline TwirlVariance twirl_variance(const ChannelChain& c) {
  c.validate();
  const double d2 = c.delta * c.delta;
  const double tau = c.gaussian.tau, nu = c.gaussian.nu;
  TwirlVariance v;
  v.sigma2 = twirl_sigma2_exact(d2, tau, nu, c.phi);
  v.sigma_g2_exact = twirl_sigma2_exact(d2, tau, nu, 0.0);
  v.sigma_g2 = d2 / 2.0 + nu + (1.0 - tau) * (1.0 - tau) / (2.0 * d2);
  v.sigma2_approx = v.sigma_g2 + tau * c.phi * c.phi / (2.0 * d2);
  return v;
}

// Dedicated loss form: envelope Delta followed by loss gamma.
inline double loss_sigma2(double delta, double gamma) {
  const double d2 = delta * delta, t = std::sqrt(1.0 - gamma);
  return t * std::tanh(d2 / 2.0) + gamma / 2.0 + (1.0 - t) * (1.0 - t) / (2.0 * std::tanh(d2));
}

// Envelope-only variance under the two conventions the estimates use.
enum class SigmaConvention { tanh_half, delta_over_sqrt2 };

inline double envelope_sigma2(double delta, SigmaConvention c) {
  const double d2 = delta * delta;
  return c == SigmaConvention::tanh_half ? std::tanh(d2 / 2.0) : d2 / 2.0;
}

inline std::string to_string(SigmaConvention c) {
  return c == SigmaConvention::tanh_half ? "sqrt(tanh(Delta^2/2))" : "Delta/sqrt(2)";
}

enum class Regime { gaussian, sub, super, critical, numeric };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::gaussian: return "gaussian";
    case Regime::sub: return "sub";
    case Regime::super: return "super";
    case Regime::critical: return "critical";
    case Regime::numeric: return "numeric";
  }
  return "?";
}

struct InfidelityReport {
  double avg_gate_infidelity = 0.0;
  double entanglement_infidelity = 0.0;
  double sigma = 0.0;
  Regime regime = Regime::gaussian;
  bool validity_warning = false;
  std::string sigma_convention;
};

inline double avg_from_entanglement(double fe, int n) {
  const double dim = std::ldexp(1.0, n);
  return dim / (dim + 1.0) * fe;
}

inline InfidelityReport make_report(double fe, int n, double sigma, Regime regime, bool warn,
                                    std::string conv = {}) {
  InfidelityReport r;
  r.entanglement_infidelity = fe;
  r.avg_gate_infidelity = avg_from_entanglement(fe, n);
  r.sigma = sigma;
  r.regime = regime;
  r.validity_warning = warn;
  r.sigma_convention = std::move(conv);
  return r;
}

inline InfidelityReport logical_infidelity(double sigma2, const PatchStats& stats, int n,
                                           TailMode mode, std::string conv = {}) {
  if (!(sigma2 > 0.0)) throw validation_error("sigma^2 must be positive");
  if (stats.shells.empty()) throw validation_error("patch stats are empty");
  const double sigma = std::sqrt(sigma2);
  const double fe = gaussian_tail_estimate(stats, sigma, mode).value;
  return make_report(fe, n, sigma, Regime::gaussian, sigma > stats.d / 4.0, std::move(conv));
}

struct CriticalDephasing {
  double sigma_d = 0.0;
  double sigma_d2 = 0.0;
};

// sigma_d* = 2 sqrt(2) Delta sigma_g^2 / d with the small-parameter sigma_g^2.
inline CriticalDephasing critical_dephasing(const ChannelChain& c, double d) {
  if (!(d > 0.0)) throw validation_error("distance must be positive");
  const double sg2 = twirl_variance(c).sigma_g2;
  const double s = 2.0 * std::sqrt(2.0) * c.delta * sg2 / d;
  return {s, s * s};
}

enum class DephasingMethod { autoselect, sub, super, critical, numeric };

namespace detail {

inline double dephasing_numeric_fe(const ChannelChain& c, double a, double d, double epsabs,
                                   double epsrel) {
  const double sd = c.sigma_d, d2 = c.delta * c.delta;
  const double tau = c.gaussian.tau, nu = c.gaussian.nu;
  const double lim = std::min(kPi, 40.0 * sd);
  auto f = [&](double p) {
    const double s2 = twirl_sigma2_exact(d2, tau, nu, c.phi + p);
    return std::exp(-p * p / (2.0 * sd * sd)) * std::erfc(d / (2.0 * std::sqrt(2.0 * s2)));
  };
  const double norm = a / std::sqrt(2.0 * kPi * sd * sd);
  // Breakpoint at the Gaussian peak.
  auto r = integrate(f, -lim, lim, epsabs / norm, epsrel, {0.0});
  return norm * r.value;
}

}  // namespace detail

inline InfidelityReport dephasing_infidelity(const ChannelChain& c, const PatchStats& stats, int n,
                                             DephasingMethod method, double epsabs = 1e-14,
                                             double epsrel = 1e-10) {
  c.validate();
  if (c.sigma_d == 0.0) {
    return logical_infidelity(twirl_variance(c).sigma2, stats, n, TailMode::leading,
                              "exact twirl variance");
  }
  const double a = stats.a, d = stats.d;
  const double dl = c.delta;
  const double sd = c.sigma_d;
  const double sg2 = twirl_variance(c).sigma_g2, sg = std::sqrt(sg2);
  const double sc = critical_dephasing(c, d).sigma_d;
  if (method == DephasingMethod::autoselect) {
    if (sd >= sc / 2.0 && sd <= 2.0 * sc) method = DephasingMethod::numeric;
    else method = sd < sc ? DephasingMethod::sub : DephasingMethod::super;
  }
  const bool near_critical = sd >= sc / 2.0 && sd <= 2.0 * sc;
  double fe = 0.0;
  Regime reg = Regime::numeric;
  switch (method) {
    case DephasingMethod::sub:
      if (!(sd < sc)) throw domain_error("subcritical formula needs sigma_d < sigma_d*");
      fe = 8.0 * a * sg2 * sg * dl / (d * d * kSqrtPi * std::sqrt(sc * sc - sd * sd)) *
           std::exp(-d * d / (8.0 * sg2));
      reg = Regime::sub;
      break;
    case DephasingMethod::super:
      if (!(sd > sc)) throw domain_error("supercritical formula needs sigma_d > sigma_d*");
      fe = std::pow(2.0, 0.75) * a * sd / (std::sqrt(kPi * d * dl) * std::sqrt(sd - sc)) *
           std::exp(-dl * d / (std::sqrt(2.0) * sd) * (1.0 - sc / (2.0 * sd)));
      reg = Regime::super;
      break;
    case DephasingMethod::critical:
      fe = std::pow(2.0, 1.75) * std::tgamma(1.25) * a * std::sqrt(sg) / (kPi * std::sqrt(d)) *
           std::exp(-d * d / (8.0 * sg2));
      reg = Regime::critical;
      break;
    case DephasingMethod::numeric:
    case DephasingMethod::autoselect:
      fe = detail::dephasing_numeric_fe(c, a, d, epsabs, epsrel);
      reg = Regime::numeric;
      break;
  }
  const bool warn = (reg == Regime::sub || reg == Regime::super) && near_critical;
  return make_report(fe, n, sg, reg, warn, "exact twirl variance per phase sample");
}

// ---------------------------------------------------------------------------
// Optimizers.

struct Optimum {
  double x = 0.0;      // optimal parameter
  double value = 0.0;  // achieved variance or infidelity
};

// Delta^2_opt = -ln sqrt(1 - gamma); value is the exact loss variance there.
inline Optimum delta_for_loss(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw validation_error("gamma must be in (0, 1)");
  const double d2 = -0.5 * std::log(1.0 - gamma);
  return {d2, loss_sigma2(std::sqrt(d2), gamma)};
}

// Delta minimizing the supercritical exponent: Delta = (d sigma_d)^(1/3) / sqrt(2).
inline Optimum delta_for_dephasing(double d, double sigma_d) {
  if (!(d > 0.0 && sigma_d > 0.0)) throw validation_error("need d > 0 and sigma_d > 0");
  const double dl = std::cbrt(d * sigma_d) / std::sqrt(2.0);
  return {dl, dl * dl};
}

// Gain after loss: g_opt = (1-gamma)/(e^{D^2} - gamma e^{-D^2})^2, clamped to 1 when
// Delta^2 > gamma/2 or when the formula falls below 1.
inline Optimum gain_for_loss(double delta, double gamma) {
  if (!(delta > 0.0 && delta < 1.0)) throw validation_error("delta must be in (0, 1)");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw validation_error("gamma must be in [0, 1)");
  const double d2 = delta * delta;
  const double den = std::exp(d2) - gamma * std::exp(-d2);
  double g = (1.0 - gamma) / (den * den);
  if (d2 > gamma / 2.0 || g < 1.0) g = 1.0;
  ChannelChain c;
  c.delta = delta;
  c.gaussian = channel_compose({PhaseCovariantChannel::loss(gamma), PhaseCovariantChannel::gain(g)});
  return {g, twirl_variance(c).sigma2};
}

// Numerically optimal Delta_dB for loss + dephasing, minimizing the numeric integral.
inline Optimum delta_numeric(double gamma, double sigma_d, const PatchStats& stats, int n = 1,
                             double db_lo = 4.0, double db_hi = 16.0) {
  auto f = [&](double db) {
    ChannelChain c;
    c.delta = std::sqrt(db_to_delta2(db));
    c.gaussian = PhaseCovariantChannel::loss(gamma);
    c.sigma_d = sigma_d;
    return dephasing_infidelity(c, stats, n, DephasingMethod::numeric).avg_gate_infidelity;
  };
  // ~20 bits gives relative precision near 1e-6 on the optimum location.
  auto r = minimize_scalar(f, db_lo, db_hi, 24);
  return {r.x, r.value};
}

struct LossExpansion {
  double first_order = 0.0;  // a erfc(d/2D) + gamma a d/(2 sqrt(pi) D^3) e^{-d^2/4D^2}
  double exact_sigma = 0.0;  // a erfc(d/(2 sqrt 2 sigma)) with the exact loss variance
  double trivial = 0.0;      // gamma/2 for an unencoded qubit
};

inline LossExpansion loss_linear_expansion(const PatchStats& stats, double delta, double gamma) {
  if (!(delta > 0.0 && delta < 1.0)) throw validation_error("delta must be in (0, 1)");
  const double a = stats.a, d = stats.d, dl = delta;
  LossExpansion e;
  e.first_order = a * std::erfc(d / (2.0 * dl)) +
                  gamma * a * d / (2.0 * kSqrtPi * dl * dl * dl) * std::exp(-d * d / (4.0 * dl * dl));
  e.exact_sigma = a * std::erfc(d / (2.0 * std::sqrt(2.0 * loss_sigma2(delta, gamma))));
  e.trivial = gamma / 2.0;
  return e;
}

}  // namespace gkp
