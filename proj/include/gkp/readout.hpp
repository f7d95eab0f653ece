#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gkp/codes.hpp"
#include "gkp/errors.hpp"
#include "gkp/geometry.hpp"
#include "gkp/numerics.hpp"

namespace gkp {

// ---------------------------------------------------------------------------
// Binned homodyne readout.

// b = cosh(Delta^2) sqrt(pi)/r_P; for Z this is cosh(Delta^2) alpha_1 with beta_1 = 0.
inline double bin_size(const GkpCode& code, double delta, Pauli p = Pauli::Z) {
  if (!(delta >= 0.0 && delta < 1.0)) throw validation_error("delta must be in [0, 1)");
  double base = pauli_bin(code, p);
  if (p == Pauli::Z) {
    const GkpCode rc = std::abs(code.beta[0]) > 1e-12 ? rotate_beta_to_p(code) : code;
    if (std::abs(rc.beta[0]) > 1e-12) throw domain_error("could not rotate code to beta_1 = 0");
    base = rc.alpha[0];
  }
  return std::cosh(delta * delta) * base;
}

struct BinnedMeasurement {
  double alpha1 = kSqrtPi;
  double delta = 0.0;
  double eta = 1.0;
  double b = kSqrtPi;

  void validate() const {
    if (!(alpha1 > 0.0)) throw validation_error("alpha1 must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw validation_error("delta must be in (0, 1)");
    if (!(eta > 0.0 && eta <= 1.0)) throw validation_error("eta must be in (0, 1]");
    if (!(b > 0.0)) throw validation_error("bin size must be positive");
  }
};

// Z-basis readout of a code with the default bin cosh(Delta^2) alpha_1.
inline BinnedMeasurement make_binned(const GkpCode& code, double delta, double eta) {
  const GkpCode rc = std::abs(code.beta[0]) > 1e-12 ? rotate_beta_to_p(code) : code;
  BinnedMeasurement m{rc.alpha[0], delta, eta, bin_size(rc, delta)};
  m.validate();
  return m;
}

struct BinnedError {
  double p10 = 0.0;      // P(1 | 0)
  double p01 = 0.0;      // P(0 | 1)
  double average = 0.0;  // reported M
  int s_max = 0;
  double tail_bound = 0.0;  // dropped peak weight, relative
};

namespace detail {

// Probability that a peak-mixture state lands in the bins of the wrong outcome. Cross terms of
// |psi|^2 are dropped; each peak is a Gaussian blurred by the POVM.
inline double wrong_bin_probability(const BinnedMeasurement& m, int parity, int s_max,
                                    double* tail) {
  const double d2 = m.delta * m.delta;
  const double th = std::tanh(d2), sech = 1.0 / std::cosh(d2);
  const double sigma = std::sqrt((th + (1.0 - m.eta) / m.eta) / 2.0);
  double wsum = 0.0, psum = 0.0;
  for (int s = -s_max; s <= s_max; ++s) {
    const int k = 2 * s + parity;
    const double w = std::exp(-(k * m.alpha1) * (k * m.alpha1) * th);
    if (w == 0.0) continue;
    const double mu = k * m.alpha1 * sech;
    // Wrong-outcome bins for |0>: [(2t+1/2)b, (2t+3/2)b]; for |1>: [(2t-1/2)b, (2t+1/2)b].
    const double shift = parity == 0 ? 0.5 : -0.5;
    const double reach = 40.0 * sigma + 4.0 * m.b;
    const int t_lo = static_cast<int>(std::floor((mu - reach) / (2.0 * m.b))) - 1;
    const int t_hi = static_cast<int>(std::ceil((mu + reach) / (2.0 * m.b))) + 1;
    double p = 0.0;
    for (int t = t_lo; t <= t_hi; ++t) {
      p += normal_interval(mu, sigma, (2 * t + shift) * m.b, (2 * t + shift + 1.0) * m.b);
    }
    wsum += w;
    psum += w * p;
  }
  if (tail) {
    // Gaussian tail of the dropped peak weights relative to the kept mass.
    const double kk = 2.0 * s_max + 2.0;
    *tail = std::exp(-(kk * m.alpha1) * (kk * m.alpha1) * th) / wsum * 2.0;
  }
  return psum / wsum;
}

}  // namespace detail

// s_max < 0 selects adaptive truncation (tail bound < 1e-14, hard cap 64).
inline BinnedError binned_error_series(const BinnedMeasurement& m, int s_max = -1) {
  m.validate();
  BinnedError e;
  if (s_max < 0) {
    const double th = std::tanh(m.delta * m.delta);
    // Smallest s with exp(-((2s+2) alpha1)^2 th) < 1e-16.
    const double need = std::sqrt(std::log(1e16) / th) / m.alpha1;
    s_max = std::min(64, static_cast<int>(std::ceil(need / 2.0)) + 1);
  }
  e.s_max = s_max;
  double t0 = 0.0, t1 = 0.0;
  e.p10 = detail::wrong_bin_probability(m, 0, s_max, &t0);
  e.p01 = detail::wrong_bin_probability(m, 1, s_max, &t1);
  e.tail_bound = std::max(t0, t1);
  e.average = 0.5 * (e.p10 + e.p01);
  return e;
}

// M ~ erfc(alpha1 / (2 sqrt(Delta^2 + (1-eta)/eta))).
inline double binned_error_approx(double alpha1, double delta, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw validation_error("eta must be in (0, 1]");
  return std::erfc(0.5 * alpha1 / std::sqrt(delta * delta + (1.0 - eta) / eta));
}

struct RequiredEfficiency {
  double eta = 0.0;         // inversion of the closed-form approximation
  double eta_series = 0.0;  // root of the series (NaN when the series floor exceeds the target)
  double floor = 0.0;       // erfc(alpha1 / (2 Delta)), the eta = 1 value
};

inline RequiredEfficiency required_efficiency(double alpha1, double delta, double target) {
  if (!(delta > 0.0 && delta < 1.0)) throw validation_error("delta must be in (0, 1)");
  if (!(target > 0.0 && target < 1.0)) throw validation_error("target must be in (0, 1)");
  RequiredEfficiency r;
  r.floor = binned_error_approx(alpha1, delta, 1.0);
  if (target < r.floor) {
    throw domain_error("target " + std::to_string(target) + " is below the Delta-limited floor " +
                       std::to_string(r.floor));
  }
  if (target == r.floor) {
    r.eta = 1.0;
  } else {
    r.eta = find_root([&](double e) { return binned_error_approx(alpha1, delta, e) - target; },
                      1e-9, 1.0, 1e-12);
  }
  const BinnedMeasurement base{alpha1, delta, 1.0, std::cosh(delta * delta) * alpha1};
  auto series = [&](double e) {
    BinnedMeasurement m = base;
    m.eta = e;
    return binned_error_series(m).average - target;
  };
  r.eta_series = std::numeric_limits<double>::quiet_NaN();
  if (series(1.0) < 0.0) {
    const double lo = std::max(1e-3, r.eta - 0.2);
    if (series(lo) > 0.0) r.eta_series = find_root(series, lo, 1.0, 1e-10);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Squeezing before homodyne detection.

inline double squeeze_db_from_r(double r) { return 20.0 * std::log10(std::exp(1.0)) * r; }
inline double squeeze_r_from_db(double db) { return db / (20.0 * std::log10(std::exp(1.0))); }

inline double squeeze_eta_eff(double r, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw validation_error("eta must be in (0, 1]");
  return 1.0 / (1.0 + std::exp(-2.0 * r) * (1.0 / eta - 1.0));
}

struct SqueezeRequirement {
  double r = 0.0;
  double s_db = 0.0;
};

inline SqueezeRequirement squeeze_for_target(double eta, double target) {
  if (!(eta > 0.0 && eta < 1.0)) throw validation_error("eta must be in (0, 1)");
  if (!(target >= eta && target < 1.0)) throw validation_error("target must be in [eta, 1)");
  const double r = -0.5 * std::log((1.0 / target - 1.0) / (1.0 / eta - 1.0));
  return {r, squeeze_db_from_r(r)};
}

// ---------------------------------------------------------------------------
// Two-mode continuous readout (coupling g, measurement rate kappa, efficiency eta, time t).

struct ReadoutScheme {
  double g = 1.0;
  double kappa = 1.0;
  double eta = 1.0;
  double t = 1.0;

  void validate() const {
    if (!(g > 0.0 && kappa > 0.0 && t > 0.0)) throw validation_error("g, kappa, t must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw validation_error("eta must be in (0, 1]");
  }
};

inline double readout_tau(double kappa, double t) {
  const double y = std::exp(-kappa * t / 2.0);
  return t - (1.0 - y) * (3.0 - y) / kappa;
}

struct TwoModeEfficiency {
  double eta_eff = 0.0;           // vacuum ancilla
  double eta_eff_squeezed = 0.0;  // position-squeezed ancilla: 1/(C + 1)
  double tau = 0.0;
  double c = 0.0;
};

inline TwoModeEfficiency twomode_eta_eff(const ReadoutScheme& s) {
  s.validate();
  TwoModeEfficiency e;
  e.tau = readout_tau(s.kappa, s.t);
  const double y = std::exp(-s.kappa * s.t / 2.0);
  const double x = 4.0 * s.g * s.g * e.tau * s.eta;
  e.eta_eff = x / (x + s.kappa);
  e.c = (s.kappa * e.tau - s.eta * std::pow(1.0 - y, 4)) / (4.0 * s.g * s.g * e.tau * e.tau * s.eta);
  e.eta_eff_squeezed = 1.0 / (e.c + 1.0);
  return e;
}

// u* = kappa_opt t maximizes tau/kappa = t^2 h(u), h(u) = 1/u - (1-e^{-u/2})(3-e^{-u/2})/u^2.
inline double optimal_rate_product() {
  static const double u = [] {
    auto neg_h = [](double v) {
      const double y = std::exp(-v / 2.0);
      return -(1.0 / v - (1.0 - y) * (3.0 - y) / (v * v));
    };
    return minimize_scalar(neg_h, 0.5, 20.0, 52).x;
  }();
  return u;
}

inline double kappa_opt(double t) {
  if (!(t > 0.0)) throw validation_error("t must be positive");
  return optimal_rate_product() / t;
}

enum class Ancilla { vacuum, position_squeezed };

// Measurement time reaching eta_eff = target at kappa = kappa_opt(t).
inline double time_to_target(double g, double eta, double target, Ancilla ancilla) {
  if (!(g > 0.0)) throw validation_error("g must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) throw validation_error("eta must be in (0, 1]");
  if (!(target > 0.0 && target < 1.0)) throw validation_error("target must be in (0, 1)");
  auto f = [&](double t) {
    const auto e = twomode_eta_eff({g, kappa_opt(t), eta, t});
    return (ancilla == Ancilla::vacuum ? e.eta_eff : e.eta_eff_squeezed) - target;
  };
  double hi = 1.0 / g;
  for (int i = 0; i < 200 && f(hi) < 0.0; ++i) hi *= 2.0;
  double lo = hi;
  for (int i = 0; i < 200 && f(lo) > 0.0; ++i) lo /= 2.0;
  return find_root(f, lo, hi, 1e-12);
}

struct PovmParams {
  double tau = 0.0;
  double c = 0.0;          // blur constant with a general ancilla
  double c_vacuum = 0.0;   // C + (1-y)^4/(4 g^2 tau^2): vacuum ancilla folded in
  std::array<double, 7> coeffs{};  // c1..c7
  double e_r2 = 0.0, e_s2 = 0.0, e_rs = 0.0;
  double det_sigma = 0.0;
  double normalization = 0.0;  // (2 pi (kappa tau - eta (1-y)^4))^{-1/2}
  double x_scale = 0.0;        // X = -S x_scale
  double ancilla_shift = 0.0;  // (1-y)^2 / (2 g tau), coefficient of the ancilla position
  double offdiag_rate = 0.0;   // (g^2/kappa)(t - 2(1-y)/kappa)
  double position_rate = 0.0;  // g^2 eta tau / kappa
  double kappa = 0.0;

  // Weight of the photocurrent at time t' in the outcome X.
  double x_weight(double tp) const {
    return -std::sqrt(kappa) * (1.0 - std::exp(-kappa * tp / 2.0)) * x_scale;
  }
};

inline PovmParams povm_params(const ReadoutScheme& s) {
  s.validate();
  const double g = s.g, k = s.kappa, eta = s.eta, t = s.t;
  const double y = std::exp(-k * t / 2.0);
  PovmParams p;
  p.kappa = k;
  p.tau = readout_tau(k, t);
  p.c = (k * p.tau - eta * std::pow(1.0 - y, 4)) / (4.0 * g * g * p.tau * p.tau * eta);
  p.c_vacuum = p.c + std::pow(1.0 - y, 4) / (4.0 * g * g * p.tau * p.tau);
  const double r2g = std::sqrt(2.0) * g / k;
  p.coeffs[0] = -k * t / 2.0;
  p.coeffs[1] = r2g * (1.0 - std::exp(k * t / 2.0));
  p.coeffs[2] = r2g * (1.0 - y) * (1.0 + eta - eta * y);
  p.coeffs[3] = r2g * (1.0 - y) * (eta - 1.0 - eta * y);
  p.coeffs[4] = (g * g / (k * k)) * (2.0 * (1.0 - y) - k * t - eta * k * p.tau);
  p.coeffs[5] = (2.0 * g * g / (k * k)) * (-2.0 * (1.0 - y) + k * t - eta * k * p.tau);
  p.coeffs[6] = (eta / 2.0) * (std::exp(-k * t) - 1.0);
  p.e_r2 = 1.0 - std::exp(-k * t);
  p.e_s2 = k * p.tau;
  p.e_rs = (1.0 - y) * (1.0 - y);
  p.det_sigma = k * t * (1.0 - std::exp(-k * t)) - 4.0 * (1.0 - y) * (1.0 - y);
  p.normalization = 1.0 / std::sqrt(2.0 * kPi * (k * p.tau - eta * std::pow(1.0 - y, 4)));
  p.x_scale = 1.0 / std::sqrt(8.0 * g * g * p.tau * p.tau * eta);
  p.ancilla_shift = (1.0 - y) * (1.0 - y) / (2.0 * g * p.tau);
  p.offdiag_rate = (g * g / k) * (t - 2.0 * (1.0 - y) / k);
  p.position_rate = g * g * eta * p.tau / k;
  return p;
}

// ---------------------------------------------------------------------------
// Ideal Pauli operators as sums of displacements T(v).

struct PauliTerm {
  int i = 0, j = 0;  // v = i alpha + j beta
  Vec2 v;
  double coeff = 0.0;
};

struct PauliOpSeries {
  Pauli pauli = Pauli::Z;
  int n_max = 0;
  std::vector<PauliTerm> terms;

  std::map<std::pair<int, int>, double> by_index() const {
    std::map<std::pair<int, int>, double> m;
    for (auto& t : terms) m[{t.i, t.j}] = t.coeff;
    return m;
  }
};

enum class PauliSeriesKind { square, rect, hex };

namespace detail {

inline double hex_f(int m, int n) {
  const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
  const double den = (m + n + 0.5) * (m - 2 * n + 0.5);
  return sgn * std::cos(kPi * (m + n - 1) / 3.0) / den;
}

// Index family for a Pauli: X -> (2m+1, 2n), Y -> (2m+1, 2n+1), Z -> (2m, 2n+1).
template <class F>
void for_each_index(Pauli p, int n_max, F&& visit) {
  const int lo_odd = -n_max - 1, lo_even = -n_max;
  switch (p) {
    case Pauli::X:
      for (int m = lo_odd; m <= n_max; ++m)
        for (int n = lo_even; n <= n_max; ++n) visit(m, n, 2 * m + 1, 2 * n);
      break;
    case Pauli::Y:
      for (int m = lo_odd; m <= n_max; ++m)
        for (int n = lo_odd; n <= n_max; ++n) visit(m, n, 2 * m + 1, 2 * n + 1);
      break;
    case Pauli::Z:
      for (int m = lo_even; m <= n_max; ++m)
        for (int n = lo_odd; n <= n_max; ++n) visit(m, n, 2 * m, 2 * n + 1);
      break;
    default: throw validation_error("Pauli series needs X, Y or Z");
  }
}

inline double symplectic_form(const Vec2& x, const Vec2& y) { return x[0] * y[1] - x[1] * y[0]; }

}  // namespace detail

// Closed-form coefficients. Square and rect(a) share coefficients; hex uses f(m, n).
inline PauliOpSeries pauli_op_coeffs(PauliSeriesKind kind, Pauli p, int n_max, double rect_a = 1.0) {
  if (n_max < 1) throw validation_error("n_max must be >= 1");
  const GkpCode code = kind == PauliSeriesKind::hex    ? make_hex()
                       : kind == PauliSeriesKind::rect ? make_rect(rect_a)
                                                       : make_square();
  PauliOpSeries s;
  s.pauli = p;
  s.n_max = n_max;
  detail::for_each_index(p, n_max, [&](int m, int n, int i, int j) {
    double c = 0.0;
    if (kind == PauliSeriesKind::hex) {
      switch (p) {
        case Pauli::X: c = detail::hex_f(m, n); break;
        case Pauli::Y: c = detail::hex_f(n, n - m); break;
        case Pauli::Z: c = detail::hex_f(n, m); break;
        default: break;
      }
      c *= 3.0 / (kPi * kPi);
    } else {
      switch (p) {
        case Pauli::X:
          if (n != 0) return;
          c = ((m % 2 == 0) ? 1.0 : -1.0) / (kPi * (m + 0.5));
          break;
        case Pauli::Z:
          if (m != 0) return;
          c = ((n % 2 == 0) ? 1.0 : -1.0) / (kPi * (n + 0.5));
          break;
        case Pauli::Y: c = 1.0 / (kPi * kPi * (m + 0.5) * (n + 0.5)); break;
        default: break;
      }
    }
    s.terms.push_back({i, j, i * code.alpha + j * code.beta, c});
  });
  return s;
}

// Vertices of the Euclidean Voronoi cell of a code lattice, counter-clockwise.
inline std::vector<Vec2> voronoi_polygon(const GkpCode& code) {
  auto rel = relevant_vectors(code_lattice({code}), Metric::identity(2));
  std::vector<Vec2> vs;
  for (auto& lv : rel) vs.push_back(lv.v);
  std::sort(vs.begin(), vs.end(), [](const Vec2& a, const Vec2& b) {
    return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
  });
  std::vector<Vec2> verts;
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const Vec2 u = vs[k], w = vs[(k + 1) % vs.size()];
    Mat2 a;
    a.row(0) = u.transpose();
    a.row(1) = w.transpose();
    verts.push_back(a.inverse() * Vec2(u.squaredNorm() / 2.0, w.squaredNorm() / 2.0));
  }
  return verts;
}

// Coefficients by 2-D adaptive quadrature over a patch polygon (star-shaped about 0):
// c(v) = (1/pi) int_P cos(omega(k, v)) d^2k * (-1)^{omega(l_P, v - l_P)/(2 pi)}.
inline PauliOpSeries pauli_op_coeffs_generic(const GkpCode& code, Pauli p, int n_max,
                                             std::vector<Vec2> polygon = {}, double epsabs = 1e-13) {
  if (n_max < 1) throw validation_error("n_max must be >= 1");
  if (polygon.empty()) polygon = voronoi_polygon(code);
  const Vec2 ell = pauli_displacement(code, p);
  PauliOpSeries s;
  s.pauli = p;
  s.n_max = n_max;
  detail::for_each_index(p, n_max, [&](int, int, int i, int j) {
    const Vec2 v = i * code.alpha + j * code.beta;
    double total = 0.0;
    for (std::size_t k = 0; k < polygon.size(); ++k) {
      const Vec2 a = polygon[k], b = polygon[(k + 1) % polygon.size()];
      const Vec2 e = b - a;
      const double jac = std::abs(detail::symplectic_form(a, e));
      auto outer = [&](double t) {
        const Vec2 dir = a + t * e;
        const double w = detail::symplectic_form(dir, v);
        auto inner = [w](double u) { return u * std::cos(u * w); };
        return integrate(inner, 0.0, 1.0, epsabs, 1e-12).value;
      };
      total += jac * integrate(outer, 0.0, 1.0, epsabs, 1e-12).value;
    }
    const double phase = detail::symplectic_form(ell, v - ell) / (2.0 * kPi);
    const long k = std::lround(phase);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s.terms.push_back({i, j, v, sign * total / kPi});
  });
  return s;
}

}  // namespace gkp
