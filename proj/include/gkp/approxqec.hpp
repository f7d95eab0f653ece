#pragma once

#include <gsl/gsl_multimin.h>

#include <cmath>
#include <string>
#include <vector>

#include "gkp/clifford.hpp"
#include "gkp/codes.hpp"
#include "gkp/errors.hpp"
#include "gkp/geometry.hpp"
#include "gkp/noise.hpp"

namespace gkp {

// Symmetric PSD covariance; tiny negative eigenvalues are clipped.
struct CovMat {
  Mat s;

  CovMat() = default;
  explicit CovMat(Mat m) {
    if (!is_symmetric(m)) throw validation_error("covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    if (es.eigenvalues().minCoeff() < -1e-12) throw validation_error("covariance must be PSD");
    Vec ev = es.eigenvalues().cwiseMax(0.0);
    s = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  }
};

inline Mat2 p1_matrix() { return Vec2(-1.0, 1.0).asDiagonal(); }

// M P1 M^-1 M^-T P1 M^T for a single code.
inline Mat2 qec_shape(const Mat2& m) {
  const Mat2 mi = m.inverse();
  const Mat2 p1 = p1_matrix();
  return m * p1 * mi * mi.transpose() * p1 * m.transpose();
}

inline Mat qec_shape(const std::vector<GkpCode>& codes) {
  std::vector<Mat2> blocks;
  for (auto& c : codes) blocks.push_back(qec_shape(c.m_l()));
  return direct_sum_modes(blocks);
}

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw validation_error("delta must be in (0, 1)");
}

// Covariance injected by one teleportation-based QEC round.
inline CovMat sigma_qec(const GkpCode& code, double delta) {
  check_delta(delta);
  return CovMat(std::tanh(delta * delta / 2.0) * Mat(qec_shape(code.m_l())));
}

struct TotalCovariance {
  CovMat sigma;   // Sigma_QEC + S Sigma_in S^T
  CovMat sigma0;  // Sigma / (2 tanh(Delta^2/2)), independent of Delta for isotropic input
};

// Incoming data noise defaults to the isotropic tanh(Delta^2/2) I.
inline TotalCovariance sigma_total(const std::vector<GkpCode>& codes, const GateExpr& expr,
                                   double delta, const Mat* incoming = nullptr) {
  check_delta(delta);
  const double t = std::tanh(delta * delta / 2.0);
  const Mat s = symplectic_gate(codes, expr);
  const int dim = static_cast<int>(s.rows());
  const Mat in = incoming ? *incoming : Mat(t * Mat::Identity(dim, dim));
  if (in.rows() != dim || in.cols() != dim) throw validation_error("incoming covariance has wrong size");
  Mat sig = t * qec_shape(codes) + s * in * s.transpose();
  sig = 0.5 * (sig + sig.transpose());
  TotalCovariance out;
  out.sigma = CovMat(sig);
  out.sigma0 = CovMat(sig / (2.0 * t));
  if (!is_positive_definite(out.sigma0.s)) throw domain_error("Sigma_0 is not positive definite");
  return out;
}

// Lattice of the codes under metric Sigma_0^-1 (the whitened-lattice Voronoi cell), with
// Sigma_0 = (shape + S S^T)/2 for isotropic incoming noise.
inline PatchStats effective_stats(const std::vector<GkpCode>& codes, const GateExpr& expr) {
  const Mat s = symplectic_gate(codes, expr);
  const Mat sigma0 = 0.5 * (qec_shape(codes) + s * s.transpose());
  Mat w = sigma0.inverse();
  w = 0.5 * (w + w.transpose());
  return patch_stats(code_lattice(codes), Metric(w));
}

// Noise standard deviation convention for approximate QEC.
enum class ApproxSigma { two_tanh, delta };

inline double approx_sigma2(double delta, ApproxSigma c) {
  return c == ApproxSigma::two_tanh ? 2.0 * std::tanh(delta * delta / 2.0) : delta * delta;
}

inline std::string to_string(ApproxSigma c) {
  return c == ApproxSigma::two_tanh ? "sqrt(2 tanh(Delta^2/2))" : "Delta";
}

inline InfidelityReport approx_gate_infidelity(const std::vector<GkpCode>& codes,
                                               const GateExpr& expr, double delta, TailMode mode,
                                               ApproxSigma conv = ApproxSigma::two_tanh) {
  check_delta(delta);
  const PatchStats st = effective_stats(codes, expr);
  return logical_infidelity(approx_sigma2(delta, conv), st, static_cast<int>(codes.size()), mode,
                            to_string(conv));
}

// ---------------------------------------------------------------------------
// Tables.

struct TableRow {
  std::string code;
  std::string gate;
  std::string regime;  // ideal | approx
  int a = 0;
  double d_over_sqrt_pi = 0.0;
};

inline std::vector<std::string> table_gates(const std::string& regime) {
  if (regime == "ideal") {
    return {"I", "H", "S", "S^2", "S^4", "I@I", "H@H", "CZZ", "CZY", "CYY"};
  }
  if (regime == "approx") {
    return {"I",      "H",       "S",       "S^2",     "S^4",     "Sdg",     "Sdg^2",
            "Sdg^4",  "I@I",     "H@H",     "CZZ",     "CZY",     "CYY",     "H@H*CZZ",
            "H@H*CZY", "H@H*CYY", "R@R*CZZ", "R@R*CZY", "R@R*CYY"};
  }
  throw validation_error("table regime must be ideal or approx");
}

inline std::vector<TableRow> generate_table(const std::string& regime,
                                            const std::vector<std::string>& code_names = {"square", "hex"}) {
  std::vector<TableRow> rows;
  const auto gates = table_gates(regime);
  for (const auto& cn : code_names) {
    const GkpCode code = parse_code(cn);
    for (const auto& g : gates) {
      const GateExpr e = parse_gate_expr(g);
      const std::vector<GkpCode> codes(e.n_qubits, code);
      const PatchStats st = regime == "ideal" ? deformed_patch_stats(codes, e, PatchMode::naive)
                                              : effective_stats(codes, e);
      rows.push_back({cn, g, regime, st.a, st.d / kSqrtPi});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Logical measurement preceded by teleportation EC with ancilla covariance Sigma_a.

struct MeasurementStats {
  double d_tilde = 0.0;
  int a_tilde = 0;
  double bin = 0.0;             // sqrt(pi)/r_P
  double error_estimate = 0.0;  // a erfc(d/(2 sqrt 2 Delta))
};

// Basis matrix whose first column is the outcome-flipping direction for P.
inline Mat2 measurement_basis(const GkpCode& code, Pauli p) {
  Mat2 m;
  switch (p) {
    case Pauli::X: m.col(0) = -code.beta; m.col(1) = code.alpha; break;
    case Pauli::Y: m.col(0) = code.alpha; m.col(1) = code.alpha + code.beta; break;
    case Pauli::Z: m.col(0) = code.alpha; m.col(1) = code.beta; break;
    default: throw validation_error("measurement needs X, Y or Z");
  }
  return m / kSqrtPi;
}

// Cosets of L/2L (bit 0: alpha parity, bit 1: beta parity) that flip a P outcome.
inline std::vector<unsigned> flipping_cosets(Pauli p) {
  switch (p) {
    case Pauli::X: return {2u, 3u};
    case Pauli::Y: return {1u, 2u};
    case Pauli::Z: return {1u, 3u};
    default: throw validation_error("measurement needs X, Y or Z");
  }
}

namespace detail {

// Unchecked core; strongly squeezed ancillas lose the determinant to cancellation.
inline MeasurementStats measurement_stats_impl(const GkpCode& code, Pauli p, const Mat2& sigma_a,
                                               double delta) {
  const double t = std::tanh(delta * delta / 2.0);
  const Mat2 mt = measurement_basis(code, p);
  const Mat2 mti = mt.inverse();
  const Mat2 p1 = p1_matrix();
  const Mat2 st = mt * p1 * mti * sigma_a * mti.transpose() * p1 * mt.transpose();
  Mat2 s0 = (t * Mat2::Identity() + st) / (2.0 * t);
  Mat2 w = s0.inverse();
  w = 0.5 * (w + w.transpose());
  const auto cms = coset_minima(code_lattice({code}), Metric(w));
  MeasurementStats out;
  out.d_tilde = std::numeric_limits<double>::infinity();
  for (unsigned c : flipping_cosets(p)) out.d_tilde = std::min(out.d_tilde, cms[c - 1].length);
  for (unsigned c : flipping_cosets(p)) {
    if (cms[c - 1].length <= out.d_tilde * (1.0 + kTieTol)) {
      out.a_tilde += static_cast<int>(cms[c - 1].minimizers.size()) / 2;
    }
  }
  out.bin = pauli_bin(code, p);
  out.error_estimate = out.a_tilde * std::erfc(out.d_tilde / (2.0 * std::sqrt(2.0) * delta));
  return out;
}

}  // namespace detail

inline MeasurementStats measurement_patch_stats(const GkpCode& code, Pauli p, const Mat2& sigma_a,
                                                double delta) {
  check_delta(delta);
  const double t = std::tanh(delta * delta / 2.0);
  if (!is_positive_definite(sigma_a) ||
      std::abs(sigma_a.determinant() - t * t) > 1e-10 * t * t) {
    throw validation_error("ancilla covariance must be positive definite with determinant tanh^2(Delta^2/2)");
  }
  return detail::measurement_stats_impl(code, p, sigma_a, delta);
}

inline Mat2 squeezed_ancilla(double delta, double r, double theta) {
  const double t = std::tanh(delta * delta / 2.0);
  const Mat2 rot = rotation2(theta);
  return t * rot * Vec2(std::exp(2.0 * r), std::exp(-2.0 * r)).asDiagonal() * rot.transpose();
}

struct AncillaOptimum {
  double r = 0.0;
  double theta = 0.0;
  double d_tilde = 0.0;
  Mat2 sigma_a;
};

namespace detail {

struct ancilla_problem {
  const GkpCode* code;
  Pauli p;
  double delta;
  double r_max;
};

inline double ancilla_objective(const gsl_vector* x, void* params) {
  auto* pr = static_cast<ancilla_problem*>(params);
  const double r = gsl_vector_get(x, 0), th = gsl_vector_get(x, 1);
  if (r < 0.0 || r > pr->r_max) return 1e6;
  return -measurement_stats_impl(*pr->code, pr->p, squeezed_ancilla(pr->delta, r, th), pr->delta)
              .d_tilde;
}

}  // namespace detail

// Maximizes d_tilde over squeezed ancillas: coarse grid over (r, theta), then Nelder-Mead.
inline AncillaOptimum optimize_ancilla_cov(const GkpCode& code, Pauli p, double delta,
                                           double r_max = 6.0) {
  check_delta(delta);
  detail::ancilla_problem pr{&code, p, delta, r_max};
  AncillaOptimum best;
  best.d_tilde = detail::measurement_stats_impl(code, p, squeezed_ancilla(delta, 0.0, 0.0), delta).d_tilde;
  const int nr = 13, nt = 36;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      const double r = r_max * i / (nr - 1), th = kPi * j / nt;
      const double d = detail::measurement_stats_impl(code, p, squeezed_ancilla(delta, r, th), delta).d_tilde;
      if (d > best.d_tilde * (1.0 + 1e-12)) best = {r, th, d, Mat2::Zero()};
    }
  }
  gsl_multimin_function fn{&detail::ancilla_objective, 2, &pr};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, best.r);
  gsl_vector_set(x, 1, best.theta);
  gsl_vector_set(step, 0, 0.25);
  gsl_vector_set(step, 1, kPi / 72);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  for (int it = 0; it < 400; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-7) == GSL_SUCCESS) break;
  }
  const double d = -gsl_multimin_fminimizer_minimum(m);
  if (d > best.d_tilde) {
    best.r = gsl_vector_get(m->x, 0);
    best.theta = gsl_vector_get(m->x, 1);
    best.d_tilde = d;
  }
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(step);
  gsl_vector_free(x);
  best.sigma_a = squeezed_ancilla(delta, best.r, best.theta);
  return best;
}

}  // namespace gkp
