#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "gkp/circuit.hpp"
#include "gkp/codes.hpp"
#include "gkp/errors.hpp"
#include "gkp/geometry.hpp"
#include "gkp/numerics.hpp"
#include "gkp/readout.hpp"

namespace gkp {

// Reproducible random stream: mt19937_64 seeded from (seed, stream) through std::seed_seq.
struct Seed {
  std::uint64_t seed = 20240601;
  std::uint64_t stream = 0;

  std::mt19937_64 engine() const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
  }
};

struct TailResult {
  double mass = 0.0;
  double error = 0.0;
};

namespace detail {

// Distance along the ray x = rho * dir to the boundary of the Voronoi cell of 0, by bisection
// on closest-vector queries.
inline double ray_exit(const LatticeEnumerator& en, const Vec& dir) {
  auto inside = [&](double rho) { return en.closest(rho * dir).z.isZero(); };
  double lo = 0.0, hi = 1.0;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw domain_error("ray does not leave the Voronoi cell");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline Mat cov_factor(const Mat& sigma) {
  Eigen::LLT<Mat> llt(0.5 * (sigma + sigma.transpose()));
  if (llt.info() != Eigen::Success) throw validation_error("noise covariance must be positive definite");
  return llt.matrixL();
}

}  // namespace detail

// Gaussian mass N(0, sigma) outside the metric Voronoi cell of lat, by adaptive quadrature over
// the polar angle of the whitened noise (2-D only).
inline TailResult quad_tail_2d(const Lattice& lat, const Metric& metric, const Mat& sigma,
                               double epsabs = 1e-13) {
  if (lat.dim() != 2) throw validation_error("quad_tail_2d needs a 2-D lattice");
  const LatticeEnumerator en(lat, metric);
  const Mat l = detail::cov_factor(sigma);
  auto f = [&](double th) {
    const Vec dir = l * Vec2(std::cos(th), std::sin(th));
    const double rho = detail::ray_exit(en, dir);
    return std::exp(-0.5 * rho * rho);
  };
  const auto r = integrate(f, 0.0, 2.0 * kPi, epsabs, 1e-10, {}, 5000);
  return {r.value / (2.0 * kPi), r.abs_error / (2.0 * kPi)};
}

// Same mass in any dimension by directional sampling: uniform directions of the whitened noise,
// chi-square survival beyond the exit radius. Error is one standard error.
inline TailResult quad_tail_mc(const Lattice& lat, const Metric& metric, const Mat& sigma,
                               std::size_t n_samples, const Seed& seed) {
  if (n_samples < 2) throw validation_error("need at least two samples");
  const int dim = lat.dim();
  const LatticeEnumerator en(lat, metric);
  const Mat l = detail::cov_factor(sigma);
  auto rng = seed.engine();
  std::normal_distribution<double> normal;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Vec u(dim);
    for (int k = 0; k < dim; ++k) u[k] = normal(rng);
    u.normalize();
    const double rho = detail::ray_exit(en, l * u);
    const double q = boost::math::gamma_q(0.5 * dim, 0.5 * rho * rho);
    sum += q;
    sum2 += q * q;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  return {mean, std::sqrt(var / (n - 1.0))};
}

// Binned Z readout error by quadrature over the full position wavefunction, cross terms kept.
// The efficiency blur is a Gaussian convolution, so the outcome integral is done in closed form
// and only the position integral is numerical.
inline BinnedError quad_binned_error(const GkpCode& code, double delta, double eta, double b,
                                     double epsabs = 1e-13) {
  const GkpCode rc = std::abs(code.beta[0]) > 1e-12 ? rotate_beta_to_p(code) : code;
  if (!(delta > 0.0 && delta < 1.0)) throw validation_error("delta must be in (0, 1)");
  if (!(eta > 0.0 && eta <= 1.0)) throw validation_error("eta must be in (0, 1]");
  if (!(b > 0.0)) throw validation_error("bin size must be positive");
  const double a1 = rc.alpha[0], a2 = rc.alpha[1];
  const double d2 = delta * delta;
  const double th = std::tanh(d2), coth = 1.0 / th, sech = 1.0 / std::cosh(d2);
  const double sd = std::sqrt((1.0 - eta) / (2.0 * eta));
  const int k_max = static_cast<int>(std::ceil(std::sqrt(50.0 / th) / a1)) + 2;

  auto density = [&](int parity, double x) {
    std::complex<double> psi = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
      if (((k % 2) + 2) % 2 != parity) continue;
      const double kk = k * a1;
      const double amp = std::exp(-0.5 * kk * kk * th - 0.5 * coth * (x - kk * sech) * (x - kk * sech));
      psi += amp * std::polar(1.0, 0.5 * k * k * a1 * a2);
    }
    return std::norm(psi);
  };
  const double x_lo = -k_max * a1 - 12.0, x_hi = k_max * a1 + 12.0;
  const int j_lo = static_cast<int>(std::floor(x_lo / b)) - 1;
  const int j_hi = static_cast<int>(std::ceil(x_hi / b)) + 1;

  auto wrong = [&](int parity) {
    // Outcome X lies in bin j when X in [(j - 1/2) b, (j + 1/2) b]; bin parity decides the outcome.
    auto p_wrong = [&](double x) {
      if (sd == 0.0) {
        const long j = std::lround(x / b);
        return ((j % 2) + 2) % 2 != parity ? 1.0 : 0.0;
      }
      double p = 0.0;
      const int c = static_cast<int>(std::lround(x / b));
      const int reach = static_cast<int>(std::ceil(40.0 * sd / b)) + 2;
      for (int j = c - reach; j <= c + reach; ++j) {
        if (((j % 2) + 2) % 2 == parity) continue;
        p += normal_interval(x, sd, (j - 0.5) * b, (j + 0.5) * b);
      }
      return p;
    };
    double num = 0.0, den = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
      const double lo = (j - 0.5) * b, hi = (j + 0.5) * b;
      num += integrate([&](double x) { return density(parity, x) * p_wrong(x); }, lo, hi, epsabs, 1e-12).value;
      den += integrate([&](double x) { return density(parity, x); }, lo, hi, epsabs, 1e-12).value;
    }
    return num / den;
  };
  BinnedError e;
  e.p10 = wrong(0);
  e.p01 = wrong(1);
  e.average = 0.5 * (e.p10 + e.p01);
  e.s_max = k_max / 2;
  return e;
}

// ---------------------------------------------------------------------------
// Wiener functionals R = sqrt(k) int e^{-k t'/2} dW and S = sqrt(k) int (1 - e^{-k t'/2}) dW.

struct RsCovariances {
  double e_r2 = 0.0, e_s2 = 0.0, e_rs = 0.0;
  double se_r2 = 0.0, se_s2 = 0.0, se_rs = 0.0;
};

inline constexpr int kMcStreams = 8;

inline RsCovariances mc_rs_covariances(double kappa, double t, int n_steps, int n_paths, const Seed& seed) {
  if (!(kappa > 0.0 && t > 0.0)) throw validation_error("kappa and t must be positive");
  if (n_steps < 1000 || n_paths < 1000) throw validation_error("n_steps and n_paths must be >= 1000");
  const double dt = t / n_steps;
  std::vector<double> wr(n_steps), ws(n_steps);
  for (int i = 0; i < n_steps; ++i) {
    const double e = std::exp(-kappa * (i + 0.5) * dt / 2.0);
    wr[i] = std::sqrt(kappa) * e;
    ws[i] = std::sqrt(kappa) * (1.0 - e);
  }
  // Paths are split over fixed streams; partial sums are reduced in stream order.
  std::array<std::array<double, 6>, kMcStreams> partial{};
  for (int s = 0; s < kMcStreams; ++s) {
    const int begin = static_cast<int>(static_cast<long long>(n_paths) * s / kMcStreams);
    const int end = static_cast<int>(static_cast<long long>(n_paths) * (s + 1) / kMcStreams);
    auto rng = Seed{seed.seed, seed.stream * kMcStreams + static_cast<std::uint64_t>(s)}.engine();
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    auto& acc = partial[s];
    for (int p = begin; p < end; ++p) {
      double r = 0.0, q = 0.0;
      for (int i = 0; i < n_steps; ++i) {
        const double dw = normal(rng);
        r += wr[i] * dw;
        q += ws[i] * dw;
      }
      const double v[3] = {r * r, q * q, r * q};
      for (int k = 0; k < 3; ++k) {
        acc[k] += v[k];
        acc[k + 3] += v[k] * v[k];
      }
    }
  }
  std::array<double, 6> tot{};
  for (const auto& acc : partial)
    for (int k = 0; k < 6; ++k) tot[k] += acc[k];
  const double n = n_paths;
  auto mean_se = [&](int k, double& m, double& se) {
    m = tot[k] / n;
    se = std::sqrt(std::max(0.0, tot[k + 3] / n - m * m) / (n - 1.0));
  };
  RsCovariances c;
  mean_se(0, c.e_r2, c.se_r2);
  mean_se(1, c.e_s2, c.se_s2);
  mean_se(2, c.e_rs, c.se_rs);
  return c;
}

// ---------------------------------------------------------------------------
// Stabilizer tableaus.

// i^phase * prod_q X_q^{x_q} Z_q^{z_q}
struct PauliString {
  int phase = 0;
  std::vector<std::uint8_t> x, z;

  static PauliString identity(int n) { return {0, std::vector<std::uint8_t>(n), std::vector<std::uint8_t>(n)}; }
  static PauliString single(int n, int q, Pauli p, int sign = 1) {
    PauliString s = identity(n);
    if (p == Pauli::X || p == Pauli::Y) s.x[q] = 1;
    if (p == Pauli::Z || p == Pauli::Y) s.z[q] = 1;
    s.phase = (p == Pauli::Y ? 1 : 0) + (sign < 0 ? 2 : 0);
    return s;
  }
  bool operator==(const PauliString& o) const { return phase % 4 == o.phase % 4 && x == o.x && z == o.z; }
  bool supported_only_on(int q) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (static_cast<int>(i) != q && (x[i] || z[i])) return false;
    return true;
  }
};

inline PauliString operator*(const PauliString& a, const PauliString& b) {
  PauliString r = PauliString::identity(static_cast<int>(a.x.size()));
  int ph = a.phase + b.phase;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    ph += 2 * (a.z[i] & b.x[i]);
    r.x[i] = a.x[i] ^ b.x[i];
    r.z[i] = a.z[i] ^ b.z[i];
  }
  r.phase = ph % 4;
  return r;
}

// Conjugation map P -> U P U^dag, stored as images of X_0, Z_0, X_1, Z_1, ...
struct Tableau {
  int n = 0;
  std::vector<PauliString> img;

  static Tableau identity(int n) {
    Tableau t{n, {}};
    for (int q = 0; q < n; ++q) {
      t.img.push_back(PauliString::single(n, q, Pauli::X));
      t.img.push_back(PauliString::single(n, q, Pauli::Z));
    }
    return t;
  }
  PauliString apply(const PauliString& p) const {
    PauliString r = PauliString::identity(n);
    r.phase = p.phase;
    for (int q = 0; q < n; ++q) {
      if (p.x[q]) r = r * img[2 * q];
      if (p.z[q]) r = r * img[2 * q + 1];
    }
    return r;
  }
  // this after other: P -> this(other(P)).
  Tableau after(const Tableau& other) const {
    Tableau t{n, {}};
    for (const auto& g : other.img) t.img.push_back(apply(g));
    return t;
  }
  bool is_local() const {
    for (int q = 0; q < n; ++q)
      if (!img[2 * q].supported_only_on(q) || !img[2 * q + 1].supported_only_on(q)) return false;
    return true;
  }
  bool operator==(const Tableau& o) const { return n == o.n && img == o.img; }
};

namespace detail {

inline Tableau single_qubit_tableau(int n, int q, int element) {
  const auto& e = CliffordGroup::instance()[element];
  Tableau t = Tableau::identity(n);
  t.img[2 * q] = PauliString::single(n, q, e.img_x.p, e.img_x.sign);
  t.img[2 * q + 1] = PauliString::single(n, q, e.img_z.p, e.img_z.sign);
  return t;
}

inline Tableau cz_tableau(int n, int a, int b) {
  Tableau t = Tableau::identity(n);
  t.img[2 * a] = t.img[2 * a] * PauliString::single(n, b, Pauli::Z);
  t.img[2 * b] = PauliString::single(n, a, Pauli::Z) * t.img[2 * b];
  return t;
}

inline int basis_change_element(char p) {
  return CliffordGroup::instance().basis_change(parse_pauli(p));
}

// Tableau of one gate op, or of its inverse.
inline Tableau gate_tableau(int n, const CircuitOp& op, bool inverse) {
  const auto& g = CliffordGroup::instance();
  if (op.name == "H" || op.name == "S") {
    int e = op.name == "H" ? g.hadamard() : g.phase();
    if (inverse) e = g.inverse(e);
    return single_qubit_tableau(n, op.qubits[0], e);
  }
  const std::string name = op.name == "CZ" ? "CZZ" : op.name;
  if (name.size() != 3 || name[0] != 'C') throw validation_error("non-Clifford op '" + op.name + "'");
  const int a = op.qubits[0], b = op.qubits[1];
  // C_PQ = (V_P x V_Q) CZ (V_P x V_Q)^dag is an involution.
  const int va = basis_change_element(name[1]), vb = basis_change_element(name[2]);
  const Tableau v = single_qubit_tableau(n, a, va).after(single_qubit_tableau(n, b, vb));
  const Tableau vinv =
      single_qubit_tableau(n, a, g.inverse(va)).after(single_qubit_tableau(n, b, g.inverse(vb)));
  return v.after(cz_tableau(n, a, b)).after(vinv);
}

inline Tableau segment_tableau(int n, const std::vector<CircuitOp>& gates, bool inverse) {
  Tableau t = Tableau::identity(n);
  if (!inverse) {
    for (const auto& op : gates) t = gate_tableau(n, op, false).after(t);
  } else {
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) t = gate_tableau(n, *it, true).after(t);
  }
  return t;
}

inline Tableau frame_tableau(int n, const CliffordFrame& f, bool inverse) {
  Tableau t = Tableau::identity(n);
  const auto& g = CliffordGroup::instance();
  for (std::size_t q = 0; q < f.elements.size(); ++q) {
    const int e = inverse ? g.inverse(f.elements[q]) : f.elements[q];
    t = single_qubit_tableau(n, static_cast<int>(q), e).after(t);
  }
  return t;
}

}  // namespace detail

// Checks that circuit a equals circuit b followed by b's Clifford frame (a's own frame, if any, is
// applied likewise). Both circuits must share the same sequence of preps and measurements. Between
// events the relation a = F b is tracked with F required to stay a product of single-qubit
// Cliffords; each measurement of a must equal the F-image of b's signed measurement.
inline bool tableau_equiv(const CliffordCircuit& a, const CliffordCircuit& b) {
  if (a.n != b.n) throw validation_error("tableau_equiv: qubit counts differ");
  const int n = a.n;
  auto split = [](const CliffordCircuit& c) {
    std::vector<std::vector<CircuitOp>> segs(1);
    std::vector<CircuitOp> events;
    for (const auto& op : c.ops) {
      if (op.kind == OpKind::gate) {
        segs.back().push_back(op);
      } else {
        events.push_back(op);
        segs.emplace_back();
      }
    }
    return std::make_pair(segs, events);
  };
  const auto [sa, ea] = split(a);
  const auto [sb, eb] = split(b);
  if (ea.size() != eb.size()) return false;
  Tableau f = Tableau::identity(n);
  for (std::size_t k = 0; k <= ea.size(); ++k) {
    f = detail::segment_tableau(n, sa[k], false).after(f).after(detail::segment_tableau(n, sb[k], true));
    if (!f.is_local()) return false;
    if (k == ea.size()) break;
    const CircuitOp& x = ea[k];
    const CircuitOp& y = eb[k];
    if (x.kind != y.kind || x.qubits != y.qubits) return false;
    const int q = x.qubits[0];
    if (x.kind == OpKind::prep) {
      if (x.name != y.name) return false;
      f.img[2 * q] = PauliString::single(n, q, Pauli::X);
      f.img[2 * q + 1] = PauliString::single(n, q, Pauli::Z);
    } else {
      const auto mb = PauliString::single(n, q, parse_pauli(y.name[0]), y.sign);
      const auto ma = PauliString::single(n, q, parse_pauli(x.name[0]), x.sign);
      if (!(f.apply(mb) == ma)) return false;
    }
  }
  // a's frame F_a and b's frame F_b: require F_a a = F_b b, i.e. F_a F = F_b.
  const Tableau lhs = detail::frame_tableau(n, a.frame, false).after(f);
  const Tableau rhs = detail::frame_tableau(n, b.frame, false);
  return lhs == rhs;
}

// Random input circuit over {prep 0, H, S, CZ, meas Z}, preps first on every qubit.
inline CliffordCircuit random_clifford_circuit(int n, int depth, std::mt19937_64& rng) {
  if (n < 1 || depth < 0) throw validation_error("need n >= 1 and depth >= 0");
  CliffordCircuit c;
  c.n = n;
  auto op = [](OpKind k, std::string name, std::vector<int> qs) {
    CircuitOp o;
    o.kind = k;
    o.name = std::move(name);
    o.qubits = std::move(qs);
    return o;
  };
  for (int q = 0; q < n; ++q) c.ops.push_back(op(OpKind::prep, "0", {q}));
  std::uniform_int_distribution<int> pick_q(0, n - 1);
  std::uniform_int_distribution<int> pick_kind(0, 99);
  for (int i = 0; i < depth; ++i) {
    const int k = pick_kind(rng);
    const int a = pick_q(rng);
    if (k < 35) {
      c.ops.push_back(op(OpKind::gate, "H", {a}));
    } else if (k < 70) {
      c.ops.push_back(op(OpKind::gate, "S", {a}));
    } else if (k < 90 && n > 1) {
      int b = pick_q(rng);
      while (b == a) b = pick_q(rng);
      c.ops.push_back(op(OpKind::gate, "CZ", {a, b}));
    } else if (k < 95) {
      c.ops.push_back(op(OpKind::meas, "Z", {a}));
    } else {
      c.ops.push_back(op(OpKind::prep, "0", {a}));
    }
  }
  for (int q = 0; q < n; ++q) c.ops.push_back(op(OpKind::meas, "Z", {q}));
  return c;
}

}  // namespace gkp
