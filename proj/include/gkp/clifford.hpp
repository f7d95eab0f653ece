#pragma once

#include <array>
#include <cctype>
#include <complex>
#include <deque>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gkp/codes.hpp"
#include "gkp/errors.hpp"
#include "gkp/geometry.hpp"
#include "gkp/linalg.hpp"

namespace gkp {

// ---------------------------------------------------------------------------
// Square-code symplectic generators, quadrature order (q, p) per mode.

inline Mat2 sq_hadamard() {
  Mat2 m;
  m << 0, -1, 1, 0;
  return m;
}

inline Mat2 sq_phase() {
  Mat2 m;
  m << 1, 0, 1, 1;
  return m;
}

// Two-mode CZ in (q1, q2, p1, p2) ordering.
inline Mat sq_cz() {
  Mat m(4, 4);
  m << 1, 0, 0, 0,
       0, 1, 0, 0,
       0, 1, 1, 0,
       1, 0, 0, 1;
  return m;
}

// Basis change V with V Z V^dag = P: V_X = H, V_Y = S H, V_Z = I.
inline Mat2 sq_basis_change(Pauli p) {
  switch (p) {
    case Pauli::X: return sq_hadamard();
    case Pauli::Y: return sq_phase() * sq_hadamard();
    case Pauli::Z: return Mat2::Identity();
    default: throw validation_error("controlled gates need X, Y or Z");
  }
}

// C_PQ = (V_P (x) V_Q) CZ (V_P (x) V_Q)^-1 on the square code.
inline Mat sq_controlled(Pauli p, Pauli q) {
  Mat v = direct_sum_modes({sq_basis_change(p), sq_basis_change(q)});
  return v * sq_cz() * v.inverse();
}

// Embeds a 2-mode (q_a, q_b, p_a, p_b) matrix on modes a, b of an n-mode space.
inline Mat embed_two_mode(const Mat& m4, int n_modes, int a, int b) {
  Mat out = Mat::Identity(2 * n_modes, 2 * n_modes);
  const int idx[4] = {a, b, n_modes + a, n_modes + b};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out(idx[i], idx[j]) = m4(i, j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gate expressions.
//
// Grammar: factors joined by '*' in operator order (rightmost acts first).
//   single     := NAME ['^' k]          NAME in I, H, Hdg, S, Sdg, R (= S H)
//   rotation   := rot(theta)            physical phase-space rotation
//   tensor     := term '@' term ...     one single-qubit term per qubit
//   controlled := C<P><Q> ['^' k]       P, Q in X, Y, Z; CZ aliases CZZ; acts on qubits 0, 1

struct GateFactor {
  enum class Kind { single, rotation, controlled };
  Kind kind = Kind::single;
  std::string name;
  int power = 1;
  int qubit = 0;
  double theta = 0.0;
  Pauli p = Pauli::Z, q = Pauli::Z;
};

struct GateExpr {
  int n_qubits = 1;
  std::vector<GateFactor> factors;
  std::string text;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::pair<std::string, int> split_power(const std::string& t, const std::string& whole) {
  auto pos = t.find('^');
  if (pos == std::string::npos) return {t, 1};
  std::string base = trim(t.substr(0, pos)), ps = trim(t.substr(pos + 1));
  if (ps.empty() || !std::all_of(ps.begin(), ps.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw parse_error("bad power in gate expression '" + whole + "'");
  }
  return {base, std::stoi(ps)};
}

inline GateFactor parse_single(const std::string& t, int qubit, const std::string& whole) {
  GateFactor f;
  f.qubit = qubit;
  if (t.rfind("rot(", 0) == 0 && t.back() == ')') {
    f.kind = GateFactor::Kind::rotation;
    f.name = "rot";
    const std::string arg = t.substr(4, t.size() - 5);
    std::size_t pos = 0;
    try {
      f.theta = std::stod(arg, &pos);
    } catch (const std::exception&) {
      throw parse_error("bad rotation angle in '" + whole + "'");
    }
    if (pos != arg.size()) throw parse_error("bad rotation angle in '" + whole + "'");
    return f;
  }
  auto [base, power] = split_power(t, whole);
  static const char* names[] = {"I", "H", "Hdg", "S", "Sdg", "R"};
  if (std::find(std::begin(names), std::end(names), base) == std::end(names)) {
    throw parse_error("unknown single-qubit gate '" + base + "' in '" + whole + "'");
  }
  f.name = base;
  f.power = power;
  return f;
}

}  // namespace detail

inline GateExpr parse_gate_expr(const std::string& text) {
  GateExpr e;
  e.text = detail::trim(text);
  if (e.text.empty()) throw parse_error("empty gate expression");
  bool has_bare_single = false;
  int width = 1;
  for (const auto& term : detail::split_top(e.text, '*')) {
    if (term.empty()) throw parse_error("empty factor in gate expression '" + text + "'");
    if (term.find('@') != std::string::npos) {
      auto parts = detail::split_top(term, '@');
      width = std::max(width, static_cast<int>(parts.size()));
      if (e.n_qubits > 1 && static_cast<int>(parts.size()) != e.n_qubits) {
        throw parse_error("inconsistent tensor widths in '" + text + "'");
      }
      e.n_qubits = static_cast<int>(parts.size());
      for (int k = 0; k < static_cast<int>(parts.size()); ++k) {
        e.factors.push_back(detail::parse_single(parts[k], k, text));
      }
      continue;
    }
    auto [base, power] = detail::split_power(term, text);
    if (base.size() >= 2 && base[0] == 'C' && base != "C") {
      GateFactor f;
      f.kind = GateFactor::Kind::controlled;
      std::string pq = base == "CZ" ? "ZZ" : base.substr(1);
      if (pq.size() != 2) throw parse_error("unknown controlled gate '" + base + "'");
      f.p = parse_pauli(pq[0]);
      f.q = parse_pauli(pq[1]);
      if (f.p == Pauli::I || f.q == Pauli::I) throw parse_error("controlled gate needs X/Y/Z: " + base);
      f.name = "C" + pq;
      f.power = power;
      if (e.n_qubits > 2) throw parse_error("controlled gates need exactly 2 qubits: '" + text + "'");
      e.n_qubits = 2;
      width = std::max(width, 2);
      e.factors.push_back(f);
      continue;
    }
    has_bare_single = true;
    e.factors.push_back(detail::parse_single(term, 0, text));
  }
  if (has_bare_single && e.n_qubits > 1) {
    throw parse_error("single-qubit factor in multi-qubit expression '" + text +
                      "'; write it as a tensor product such as H@I");
  }
  return e;
}

inline Mat2 sq_single(const std::string& name) {
  if (name == "I") return Mat2::Identity();
  if (name == "H") return sq_hadamard();
  if (name == "Hdg") return sq_hadamard().inverse();
  if (name == "S") return sq_phase();
  if (name == "Sdg") return sq_phase().inverse();
  if (name == "R") return sq_phase() * sq_hadamard();
  throw parse_error("unknown single-qubit gate '" + name + "'");
}

inline Mat matrix_power(const Mat& m, int k) {
  Mat r = Mat::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) r = r * m;
  return r;
}

// Symplectic matrix of a gate expression on the direct sum of the given codes.
// Logical gates are conjugated by the per-mode change of basis; rot(theta) is physical.
inline Mat symplectic_gate(const std::vector<GkpCode>& codes, const GateExpr& expr) {
  const int n = static_cast<int>(codes.size());
  if (n != expr.n_qubits) {
    throw validation_error("gate expression '" + expr.text + "' acts on " +
                           std::to_string(expr.n_qubits) + " qubit(s) but " + std::to_string(n) +
                           " code(s) were given");
  }
  const Mat m = code_change_of_basis(codes);
  const Mat minv = m.inverse();
  Mat total = Mat::Identity(2 * n, 2 * n);
  for (const auto& f : expr.factors) {
    Mat s;
    switch (f.kind) {
      case GateFactor::Kind::single:
        s = m * matrix_power(embed_mode(sq_single(f.name), n, f.qubit), f.power) * minv;
        break;
      case GateFactor::Kind::controlled:
        s = m * matrix_power(embed_two_mode(sq_controlled(f.p, f.q), n, 0, 1), f.power) * minv;
        break;
      case GateFactor::Kind::rotation:
        s = embed_mode(rotation2(f.theta), n, f.qubit);
        break;
    }
    total = total * s;
  }
  return total;
}

inline Mat symplectic_gate(const std::vector<GkpCode>& codes, const std::string& expr) {
  return symplectic_gate(codes, parse_gate_expr(expr));
}

enum class PatchMode { naive, modified };

// Naive: the undeformed Voronoi cell facing noise S S^T (equivalently the cell S^-1 V with
// isotropic noise). Modified: the deformed cell S V, whose stats equal the identity gate's.
inline PatchStats deformed_patch_stats(const std::vector<GkpCode>& codes, const GateExpr& expr,
                                       PatchMode mode) {
  const Mat s = symplectic_gate(codes, expr);
  const Lattice lat = code_lattice(codes);
  const Metric eye = Metric::identity(lat.dim());
  if (mode == PatchMode::modified) return patch_stats(lat, eye);
  return facet_stats(lat, eye, s * s.transpose());
}

// Same naive stats computed by deforming the lattice: lattice S^-1 L under metric S^T S,
// facing isotropic noise.
inline PatchStats deformed_patch_stats_via_lattice(const std::vector<GkpCode>& codes,
                                                   const GateExpr& expr) {
  const Mat s = symplectic_gate(codes, expr);
  const Lattice lat = code_lattice(codes);
  const Lattice deformed(s.inverse() * lat.generator);
  const Mat sts = s.transpose() * s;
  return facet_stats(deformed, Metric(0.5 * (sts + sts.transpose())),
                     Mat::Identity(lat.dim(), lat.dim()));
}

// ---------------------------------------------------------------------------
// Single-qubit Clifford group (24 elements modulo phase), built from 2x2 unitaries.

using Mat2c = Eigen::Matrix2cd;

struct SignedPauli {
  Pauli p = Pauli::I;
  int sign = 1;
  bool operator==(const SignedPauli&) const = default;
};

inline Mat2c pauli_matrix(Pauli p) {
  using C = std::complex<double>;
  Mat2c m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, C(0, -1), C(0, 1), 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

struct CliffordElement {
  std::string name;
  Mat2c u;
  SignedPauli img_x;  // u X u^dag
  SignedPauli img_z;  // u Z u^dag
};

class CliffordGroup {
 public:
  static const CliffordGroup& instance() {
    static const CliffordGroup g;
    return g;
  }

  int size() const { return static_cast<int>(elems_.size()); }
  const CliffordElement& operator[](int i) const { return elems_.at(i); }
  int identity() const { return 0; }
  int hadamard() const { return find("H"); }
  int phase() const { return find("S"); }

  // Index of the element equal to u up to global phase.
  int from_unitary(const Mat2c& u) const {
    for (int i = 0; i < size(); ++i) {
      if (std::abs(std::abs((elems_[i].u.adjoint() * u).trace()) - 2.0) < 1e-9) return i;
    }
    throw validation_error("matrix is not a single-qubit Clifford");
  }

  int compose(int a, int b) const { return table_[a][b]; }  // operator a * b
  int inverse(int a) const { return inv_[a]; }

  int find(const std::string& name) const {
    for (int i = 0; i < size(); ++i) {
      if (elems_[i].name == name) return i;
    }
    throw parse_error("unknown Clifford frame element '" + name + "'");
  }

  // u P u^dag as a signed Pauli.
  SignedPauli conjugate(int e, Pauli p) const {
    if (p == Pauli::I) return {Pauli::I, 1};
    const Mat2c m = elems_[e].u * pauli_matrix(p) * elems_[e].u.adjoint();
    return classify(m);
  }

  static SignedPauli classify(const Mat2c& m) {
    for (Pauli q : {Pauli::X, Pauli::Y, Pauli::Z, Pauli::I}) {
      const Mat2c pm = pauli_matrix(q);
      if ((m - pm).cwiseAbs().maxCoeff() < 1e-9) return {q, 1};
      if ((m + pm).cwiseAbs().maxCoeff() < 1e-9) return {q, -1};
    }
    throw validation_error("matrix is not a signed Pauli");
  }

  // Element whose conjugation maps Z -> P (sign +), as used for controlled-gate bases.
  int basis_change(Pauli p) const {
    switch (p) {
      case Pauli::X: return find("H");
      case Pauli::Y: return find("SH");
      case Pauli::Z: return identity();
      default: throw validation_error("basis_change needs X, Y or Z");
    }
  }

 private:
  CliffordGroup() {
    using C = std::complex<double>;
    const double s = 1.0 / std::sqrt(2.0);
    Mat2c h, ph;
    h << s, s, s, -s;
    ph << 1, 0, 0, C(0, 1);
    // Breadth-first words over {H, S} in operator order.
    std::vector<std::pair<std::string, Mat2c>> words;
    std::deque<std::pair<std::string, Mat2c>> queue;
    queue.push_back({"", Mat2c::Identity()});
    auto seen = [&words](const Mat2c& u) {
      for (auto& w : words) {
        if (std::abs(std::abs((w.second.adjoint() * u).trace()) - 2.0) < 1e-9) return true;
      }
      return false;
    };
    while (!queue.empty()) {
      auto [w, u] = queue.front();
      queue.pop_front();
      if (seen(u)) continue;
      words.push_back({w, u});
      queue.push_back({w + "H", u * h});
      queue.push_back({w + "S", u * ph});
    }
    // Name = word of the coset representative with both images positive, times a Pauli.
    std::vector<std::pair<std::string, Mat2c>> reps;
    for (auto& [w, u] : words) {
      auto ix = classify(u * pauli_matrix(Pauli::X) * u.adjoint());
      auto iz = classify(u * pauli_matrix(Pauli::Z) * u.adjoint());
      if (ix.sign == 1 && iz.sign == 1) reps.push_back({w.empty() ? "I" : w, u});
    }
    for (auto& [w, u] : reps) {
      for (Pauli p : {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z}) {
        CliffordElement e;
        e.u = u * pauli_matrix(p);
        e.name = p == Pauli::I ? w : w + "*" + pauli_char(p);
        e.img_x = classify(e.u * pauli_matrix(Pauli::X) * e.u.adjoint());
        e.img_z = classify(e.u * pauli_matrix(Pauli::Z) * e.u.adjoint());
        elems_.push_back(e);
      }
    }
    const int n = size();
    table_.assign(n, std::vector<int>(n, -1));
    inv_.assign(n, -1);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        table_[a][b] = from_unitary(elems_[a].u * elems_[b].u);
        if (table_[a][b] == 0) inv_[a] = b;
      }
    }
  }

  std::vector<CliffordElement> elems_;
  std::vector<std::vector<int>> table_;
  std::vector<int> inv_;
};

struct CliffordFrame {
  std::vector<int> elements;  // group index per qubit
};

// ---------------------------------------------------------------------------
// Pump tones for C_PQ via the Hamiltonian -s_P (x) s_Q / T.

enum class Mixer { three_wave, four_wave };

struct Tone {
  double frequency = 0.0;  // rad/s
  double phase = 0.0;      // rad
};

struct PumpConfig {
  Tone squeezing;     // a b + h.c. term
  Tone beamsplitter;  // a b^dag + h.c. term
  double amplitude = 0.0;  // r_P r_Q / (2 T)
};

inline PumpConfig pump_config(const GkpCode& code_a, const GkpCode& code_b, Pauli p, Pauli q,
                              double omega_a, double omega_b, double duration, Mixer mixer) {
  if (!(duration > 0.0)) throw validation_error("gate time must be positive");
  if (omega_a == omega_b) throw validation_error("mode frequencies must differ");
  const PauliAxis ax = pauli_axis(code_a, p), bx = pauli_axis(code_b, q);
  const double scale = mixer == Mixer::three_wave ? 1.0 : 0.5;
  PumpConfig c;
  c.squeezing = {scale * (omega_a + omega_b), wrap_angle(-(ax.theta + bx.theta))};
  c.beamsplitter = {scale * std::abs(omega_a - omega_b), wrap_angle(-(ax.theta - bx.theta))};
  c.amplitude = ax.r * bx.r / (2.0 * duration);
  return c;
}

}  // namespace gkp
