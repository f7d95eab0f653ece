#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gkp/errors.hpp"
#include "gkp/geometry.hpp"
#include "gkp/linalg.hpp"
#include "gkp/numerics.hpp"

namespace gkp {

struct GkpCode {
  Vec2 alpha;
  Vec2 beta;
  std::string name;

  // M_L = [alpha beta] / sqrt(pi)
  Mat2 m_l() const {
    Mat2 m;
    m.col(0) = alpha;
    m.col(1) = beta;
    return m / kSqrtPi;
  }
  double area() const { return alpha[0] * beta[1] - beta[0] * alpha[1]; }
};

inline GkpCode make_custom(const Vec2& alpha, const Vec2& beta, std::string name = "custom") {
  GkpCode c{alpha, beta, std::move(name)};
  const double area = c.area();
  if (!std::isfinite(area) || std::abs(area - kPi) > 1e-12 * kPi) {
    std::ostringstream os;
    os.precision(17);
    os << "code vectors must have symplectic area pi, got " << area;
    throw validation_error(os.str());
  }
  return c;
}

inline GkpCode make_square() {
  return make_custom(Vec2(kSqrtPi, 0.0), Vec2(0.0, kSqrtPi), "square");
}

inline GkpCode make_hex() {
  const double r3 = std::pow(3.0, 0.25);
  return make_custom(kSqrtPi * Vec2(r3 / std::sqrt(2.0), -1.0 / (std::sqrt(2.0) * r3)),
                     kSqrtPi * Vec2(0.0, std::sqrt(2.0) / r3), "hex");
}

inline GkpCode make_rect(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw validation_error("rect code needs a > 0");
  std::ostringstream os;
  os.precision(17);
  os << "rect:a=" << a;
  return make_custom(Vec2(kSqrtPi * a, 0.0), Vec2(0.0, kSqrtPi / a), os.str());
}

// Accepts "square", "hex", "rect:a=<x>", "custom:ax,ay,bx,by".
inline GkpCode parse_code(const std::string& s) {
  if (s == "square") return make_square();
  if (s == "hex") return make_hex();
  auto parse_double = [&s](const std::string& t) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw parse_error("bad number '" + t + "' in code '" + s + "'");
    }
    if (pos != t.size()) throw parse_error("bad number '" + t + "' in code '" + s + "'");
    return v;
  };
  if (s.rfind("rect:a=", 0) == 0) return make_rect(parse_double(s.substr(7)));
  if (s.rfind("custom:", 0) == 0) {
    std::vector<double> v;
    std::stringstream ss(s.substr(7));
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(parse_double(tok));
    if (v.size() != 4) throw parse_error("custom code needs 4 numbers: " + s);
    return make_custom(Vec2(v[0], v[1]), Vec2(v[2], v[3]));
  }
  throw parse_error("unknown code '" + s + "' (expected square, hex, rect:a=<x>, custom:ax,ay,bx,by)");
}

struct LogicalBasis {
  Mat2 m_l;         // columns alpha/sqrt(pi), beta/sqrt(pi)
  Mat2 to_logical;  // (q, p) -> (qbar, pbar), the inverse of m_l
};

inline LogicalBasis logical_basis(const GkpCode& code) {
  LogicalBasis b;
  b.m_l = code.m_l();
  Mat2 t;
  t << code.beta[1], -code.beta[0], -code.alpha[1], code.alpha[0];
  b.to_logical = t / kSqrtPi;
  return b;
}

enum class Pauli { I, X, Y, Z };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

inline Pauli parse_pauli(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw parse_error(std::string("unknown Pauli '") + c + "'");
  }
}

struct PauliAxis {
  double r = 0.0;
  double theta = 0.0;
  int index = 0;     // 1, 2, 3 for X, Y, Z
  Vec2 coeffs;       // s = coeffs[0] q + coeffs[1] p
};

// s1 = -pbar, s3 = qbar, s2 = s1 + s3 = qbar - pbar.
inline PauliAxis pauli_axis(const GkpCode& code, Pauli p) {
  const Vec2 s1 = Vec2(code.alpha[1], -code.alpha[0]) / kSqrtPi;
  const Vec2 s3 = Vec2(code.beta[1], -code.beta[0]) / kSqrtPi;
  PauliAxis ax;
  switch (p) {
    case Pauli::X: ax.coeffs = s1; ax.index = 1; break;
    case Pauli::Y: ax.coeffs = s1 + s3; ax.index = 2; break;
    case Pauli::Z: ax.coeffs = s3; ax.index = 3; break;
    default: throw validation_error("pauli_axis needs X, Y or Z");
  }
  ax.r = ax.coeffs.norm();
  ax.theta = wrap_angle(std::atan2(ax.coeffs[1], ax.coeffs[0]));
  return ax;
}

// Logical operator displacement for each Pauli: X -> alpha, Z -> beta, Y -> alpha + beta.
inline Vec2 pauli_displacement(const GkpCode& code, Pauli p) {
  switch (p) {
    case Pauli::X: return code.alpha;
    case Pauli::Y: return code.alpha + code.beta;
    case Pauli::Z: return code.beta;
    default: return Vec2::Zero();
  }
}

// Bin size of a Pauli-basis homodyne readout in the ideal limit: sqrt(pi)/r_P.
inline double pauli_bin(const GkpCode& code, Pauli p) { return kSqrtPi / pauli_axis(code, p).r; }

struct Squeezing {
  double delta = 0.0;
  double delta_db = 0.0;
  double nbar = 0.0;
};

enum class SqueezingUnit { delta, delta_db, nbar };

inline Squeezing squeezing_from_delta2(double d2) {
  Squeezing s;
  s.delta = std::sqrt(d2);
  s.delta_db = delta2_to_db(d2);
  const double nb = 0.5 / d2 - 0.5;
  s.nbar = std::isfinite(nb) ? nb : std::numeric_limits<double>::max();
  return s;
}

inline Squeezing squeezing_conversions(double value, SqueezingUnit from) {
  switch (from) {
    case SqueezingUnit::delta:
      if (!(value > 0.0 && value <= 1.0)) throw validation_error("delta must be in (0, 1]");
      return squeezing_from_delta2(value * value);
    case SqueezingUnit::delta_db:
      if (!(value >= 0.0) || !std::isfinite(value)) throw validation_error("delta_db must be >= 0");
      return squeezing_from_delta2(db_to_delta2(value));
    case SqueezingUnit::nbar:
      if (!(value > 0.0) || !std::isfinite(value)) throw validation_error("nbar must be > 0");
      return squeezing_from_delta2(1.0 / (2.0 * value + 1.0));
  }
  throw validation_error("unknown squeezing unit");
}

// Generator of the n-mode direct-sum lattice, quadrature order (q_1..q_n, p_1..p_n).
inline Lattice code_lattice(const std::vector<GkpCode>& codes) {
  std::vector<Mat2> blocks;
  for (auto& c : codes) blocks.push_back(c.m_l() * kSqrtPi);
  return Lattice(direct_sum_modes(blocks));
}

inline Mat code_change_of_basis(const std::vector<GkpCode>& codes) {
  std::vector<Mat2> blocks;
  for (auto& c : codes) blocks.push_back(c.m_l());
  return direct_sum_modes(blocks);
}

// Rotates a code so that beta lies on the p axis (beta_1 = 0).
inline GkpCode rotate_beta_to_p(const GkpCode& code) {
  const double ang = std::atan2(code.beta[1], code.beta[0]);
  const Mat2 r = rotation2(kPi / 2 - ang);
  GkpCode out{r * code.alpha, r * code.beta, code.name};
  out.beta[0] = 0.0;
  return out;
}

}  // namespace gkp
