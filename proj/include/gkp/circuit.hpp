#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "gkp/clifford.hpp"
#include "gkp/errors.hpp"

namespace gkp {

// Line-oriented circuit format:
//   n=<int>
//   prep 0|T q<k>
//   gate H|S q<k>            (input circuits)
//   gate CZ q<a> q<b>        (input circuits)
//   gate C<P><Q> q<a> q<b>   P, Q in X, Y, Z (rewritten circuits)
//   meas [+|-]X|Y|Z q<k>     input circuits measure Z
//   frame q<k> <element>     Clifford frame trailer
// '#' starts a comment; blank lines are ignored.

enum class OpKind { prep, gate, meas };

struct CircuitOp {
  OpKind kind = OpKind::gate;
  std::string name;  // prep: "0"/"T"; gate: "H", "S", "CZ", "CXZ", ...; meas: "X"/"Y"/"Z"
  std::vector<int> qubits;
  int sign = 1;  // measurement sign
  int line = 0;
};

struct CliffordCircuit {
  int n = 0;
  std::vector<CircuitOp> ops;
  CliffordFrame frame;  // empty when no frame lines are present
};

namespace detail {

inline int parse_qubit(const std::string& tok, int n, int line) {
  if (tok.size() < 2 || tok[0] != 'q') {
    throw parse_error("line " + std::to_string(line) + ": expected qubit like q0, got '" + tok + "'");
  }
  const std::string num = tok.substr(1);
  if (!std::all_of(num.begin(), num.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw parse_error("line " + std::to_string(line) + ": bad qubit '" + tok + "'");
  }
  const int q = std::stoi(num);
  if (q >= n) {
    throw parse_error("line " + std::to_string(line) + ": qubit " + tok + " out of range for n=" +
                      std::to_string(n));
  }
  return q;
}

inline bool is_controlled_name(const std::string& g) {
  if (g == "CZ") return true;
  if (g.size() != 3 || g[0] != 'C') return false;
  auto ok = [](char c) { return c == 'X' || c == 'Y' || c == 'Z'; };
  return ok(g[1]) && ok(g[2]);
}

}  // namespace detail

inline CliffordCircuit parse_circuit(const std::string& text) {
  CliffordCircuit c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_n = false;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = "line " + std::to_string(line) + ": ";
    if (!have_n) {
      if (tok.size() != 1 || tok[0].rfind("n=", 0) != 0) throw parse_error(where + "expected header n=<int>");
      try {
        c.n = std::stoi(tok[0].substr(2));
      } catch (const std::exception&) {
        throw parse_error(where + "bad qubit count");
      }
      if (c.n <= 0) throw parse_error(where + "qubit count must be positive");
      have_n = true;
      continue;
    }
    CircuitOp op;
    op.line = line;
    if (tok[0] == "prep") {
      if (tok.size() != 3 || (tok[1] != "0" && tok[1] != "T")) throw parse_error(where + "expected 'prep 0|T q<k>'");
      op.kind = OpKind::prep;
      op.name = tok[1];
      op.qubits = {detail::parse_qubit(tok[2], c.n, line)};
    } else if (tok[0] == "gate") {
      if (tok.size() < 3) throw parse_error(where + "expected 'gate NAME qubits'");
      op.kind = OpKind::gate;
      op.name = tok[1];
      if (op.name == "H" || op.name == "S") {
        if (tok.size() != 3) throw parse_error(where + op.name + " takes one qubit");
        op.qubits = {detail::parse_qubit(tok[2], c.n, line)};
      } else if (detail::is_controlled_name(op.name)) {
        if (tok.size() != 4) throw parse_error(where + op.name + " takes two qubits");
        op.qubits = {detail::parse_qubit(tok[2], c.n, line), detail::parse_qubit(tok[3], c.n, line)};
        if (op.qubits[0] == op.qubits[1]) throw parse_error(where + "two-qubit gate on a single qubit");
      } else {
        throw parse_error(where + "unknown or non-Clifford gate '" + op.name + "'");
      }
    } else if (tok[0] == "meas") {
      if (tok.size() != 3) throw parse_error(where + "expected 'meas [+|-]P q<k>'");
      op.kind = OpKind::meas;
      std::string p = tok[1];
      if (!p.empty() && (p[0] == '+' || p[0] == '-')) {
        op.sign = p[0] == '-' ? -1 : 1;
        p = p.substr(1);
      }
      if (p != "X" && p != "Y" && p != "Z") throw parse_error(where + "unknown measurement basis '" + tok[1] + "'");
      op.name = p;
      op.qubits = {detail::parse_qubit(tok[2], c.n, line)};
    } else if (tok[0] == "frame") {
      if (tok.size() != 3) throw parse_error(where + "expected 'frame q<k> <element>'");
      const int q = detail::parse_qubit(tok[1], c.n, line);
      if (c.frame.elements.empty()) c.frame.elements.assign(c.n, CliffordGroup::instance().identity());
      try {
        c.frame.elements[q] = CliffordGroup::instance().find(tok[2]);
      } catch (const parse_error& e) {
        throw parse_error(where + e.what());
      }
      continue;
    } else {
      throw parse_error(where + "unknown token '" + tok[0] + "'");
    }
    c.ops.push_back(op);
  }
  if (!have_n) throw parse_error("missing header n=<int>");
  return c;
}

inline std::string format_circuit(const CliffordCircuit& c) {
  std::ostringstream os;
  os << "n=" << c.n << "\n";
  for (const auto& op : c.ops) {
    switch (op.kind) {
      case OpKind::prep: os << "prep " << op.name << " q" << op.qubits[0]; break;
      case OpKind::gate:
        os << "gate " << op.name;
        for (int q : op.qubits) os << " q" << q;
        break;
      case OpKind::meas:
        os << "meas " << (op.sign < 0 ? "-" : "") << op.name << " q" << op.qubits[0];
        break;
    }
    os << "\n";
  }
  const auto& g = CliffordGroup::instance();
  for (std::size_t q = 0; q < c.frame.elements.size(); ++q) {
    os << "frame q" << q << " " << g[c.frame.elements[q]].name << "\n";
  }
  return os.str();
}

struct RewriteResult {
  CliffordCircuit circuit;  // carries the final frame
  CliffordFrame frame;
};

// Commutes single-qubit Cliffords to the end of the circuit. Invariant while folding:
// input prefix = (frame) * output prefix. Pauli byproducts of the commutation are absorbed
// into the frame, so the output contains only controlled gates, preps and Pauli measurements.
inline RewriteResult rewrite_circuit(const CliffordCircuit& in) {
  const auto& g = CliffordGroup::instance();
  std::vector<int> f(in.n, g.identity());
  CliffordCircuit out;
  out.n = in.n;
  auto pauli_elem = [&g](Pauli p) { return g.from_unitary(pauli_matrix(p)); };
  for (const auto& op : in.ops) {
    if (op.kind == OpKind::prep) {
      f[op.qubits[0]] = g.identity();
      out.ops.push_back(op);
    } else if (op.kind == OpKind::meas) {
      if (op.name != "Z" || op.sign != 1) {
        throw validation_error("line " + std::to_string(op.line) + ": input circuits measure Z only");
      }
      const int q = op.qubits[0];
      const SignedPauli m = g.conjugate(g.inverse(f[q]), Pauli::Z);
      CircuitOp o = op;
      o.name = std::string(1, pauli_char(m.p));
      o.sign = m.sign;
      out.ops.push_back(o);
    } else if (op.name == "H" || op.name == "S") {
      const int q = op.qubits[0];
      f[q] = g.compose(op.name == "H" ? g.hadamard() : g.phase(), f[q]);
    } else if (op.name == "CZ") {
      const int a = std::min(op.qubits[0], op.qubits[1]);
      const int b = std::max(op.qubits[0], op.qubits[1]);
      const SignedPauli sa = g.conjugate(g.inverse(f[a]), Pauli::Z);
      const SignedPauli sb = g.conjugate(g.inverse(f[b]), Pauli::Z);
      CircuitOp o = op;
      o.name = std::string("C") + pauli_char(sa.p) + pauli_char(sb.p);
      o.qubits = {a, b};
      out.ops.push_back(o);
      // Byproducts commute with the controlled gate and fold into the frame on the right.
      if (sa.sign < 0) f[b] = g.compose(f[b], pauli_elem(sb.p));
      if (sb.sign < 0) f[a] = g.compose(f[a], pauli_elem(sa.p));
    } else {
      throw validation_error("line " + std::to_string(op.line) + ": gate '" + op.name +
                             "' is not in the input alphabet {H, S, CZ}");
    }
  }
  out.frame.elements = f;
  return {out, out.frame};
}

}  // namespace gkp
