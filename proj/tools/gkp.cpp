#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gkp/gkp.hpp"

namespace {

using json = nlohmann::ordered_json;
using Rows = std::vector<json>;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultSeed = 20240601;

// Merged string parameters: defaults < config file < explicit flags.
class Params {
 public:
  std::map<std::string, std::string> values;

  const std::string& str(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) throw usage_error("unknown parameter '" + k + "'");
    return it->second;
  }
  bool has(const std::string& k) const { return !str(k).empty(); }
  double num(const std::string& k) const {
    const std::string& s = str(k);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw usage_error("--" + dashed(k) + " expects a number, got '" + s + "'");
    }
  }
  int integer(const std::string& k) const {
    const double v = num(k);
    if (v != std::floor(v)) throw usage_error("--" + dashed(k) + " expects an integer");
    return static_cast<int>(v);
  }
  static std::string dashed(std::string k) {
    for (char& c : k)
      if (c == '_') c = '-';
    return k;
  }
};

struct Opt {
  std::string key;
  std::string def;
  std::string help;
};

struct Command {
  std::string name;  // also the sweep target name
  std::string help;
  std::vector<Opt> opts;
  std::function<Rows(const Params&)> run;
};

// ---------------------------------------------------------------------------
// Parameter helpers.

double delta_from(const Params& p) {
  if (p.has("delta")) return p.num("delta");
  return std::sqrt(gkp::db_to_delta2(p.num("delta_db")));
}

gkp::TailMode tail_from(const Params& p) {
  const auto& t = p.str("tail");
  if (t == "leading") return gkp::TailMode::leading;
  if (t == "all_shells") return gkp::TailMode::all_shells;
  throw usage_error("--tail must be leading or all_shells");
}

gkp::Pauli pauli_from(const Params& p) {
  const auto& s = p.str("pauli");
  if (s.size() != 1) throw usage_error("--pauli must be X, Y or Z");
  return gkp::parse_pauli(s[0]);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

Rows run_tables(const Params& p) {
  Rows rows;
  std::vector<std::string> regimes;
  if (p.str("regime") == "both") regimes = {"ideal", "approx"};
  else regimes = {p.str("regime")};
  for (const auto& reg : regimes) {
    for (const auto& r : gkp::generate_table(reg, split_list(p.str("codes")))) {
      rows.push_back({{"regime", r.regime}, {"code", r.code}, {"gate", r.gate}, {"a", r.a},
                      {"d_over_sqrt_pi", r.d_over_sqrt_pi}});
    }
  }
  return rows;
}

Rows run_gate(const Params& p) {
  const gkp::GkpCode code = gkp::parse_code(p.str("code"));
  const gkp::GateExpr e = gkp::parse_gate_expr(p.str("gate"));
  const std::vector<gkp::GkpCode> codes(e.n_qubits, code);
  const double delta = delta_from(p);
  gkp::check_delta(delta);
  const auto tail = tail_from(p);
  gkp::PatchStats st;
  gkp::InfidelityReport rep;
  const std::string& regime = p.str("regime");
  if (regime == "ideal") {
    gkp::PatchMode mode;
    if (p.str("patch") == "naive") mode = gkp::PatchMode::naive;
    else if (p.str("patch") == "modified") mode = gkp::PatchMode::modified;
    else throw usage_error("--patch must be naive or modified");
    gkp::SigmaConvention conv;
    if (p.str("sigma_convention") == "tanh_half") conv = gkp::SigmaConvention::tanh_half;
    else if (p.str("sigma_convention") == "delta_over_sqrt2") conv = gkp::SigmaConvention::delta_over_sqrt2;
    else throw usage_error("--sigma-convention must be tanh_half or delta_over_sqrt2");
    st = gkp::deformed_patch_stats(codes, e, mode);
    rep = gkp::logical_infidelity(gkp::envelope_sigma2(delta, conv), st, e.n_qubits, tail, gkp::to_string(conv));
  } else if (regime == "approx") {
    gkp::ApproxSigma conv;
    if (p.str("approx_sigma") == "two_tanh") conv = gkp::ApproxSigma::two_tanh;
    else if (p.str("approx_sigma") == "delta") conv = gkp::ApproxSigma::delta;
    else throw usage_error("--approx-sigma must be two_tanh or delta");
    st = gkp::effective_stats(codes, e);
    rep = gkp::approx_gate_infidelity(codes, e, delta, tail, conv);
  } else {
    throw usage_error("--regime must be ideal or approx");
  }
  return {{{"code", code.name},
           {"gate", e.text},
           {"regime", regime},
           {"patch", regime == "ideal" ? p.str("patch") : "optimal"},
           {"tail", gkp::to_string(tail)},
           {"delta", delta},
           {"delta_db", gkp::delta2_to_db(delta * delta)},
           {"a", st.a},
           {"d_over_sqrt_pi", st.d / gkp::kSqrtPi},
           {"sigma", rep.sigma},
           {"sigma_convention", rep.sigma_convention},
           {"entanglement_infidelity", rep.entanglement_infidelity},
           {"avg_gate_infidelity", rep.avg_gate_infidelity},
           {"validity_warning", rep.validity_warning}}};
}

Rows run_noise(const Params& p) {
  const gkp::GkpCode code = gkp::parse_code(p.str("code"));
  const double delta = delta_from(p);
  const double gamma = p.num("loss");
  const double sd2 = p.num("dephasing");
  if (!(sd2 >= 0.0)) throw gkp::validation_error("dephasing variance must be >= 0");
  double gain = 1.0;
  const std::string& gs = p.str("gain");
  if (gs == "auto") gain = gkp::gain_for_loss(delta, gamma).x;
  else if (gs != "none") gain = p.num("gain");
  gkp::ChannelChain c;
  c.delta = delta;
  c.gaussian = gkp::channel_compose({gkp::PhaseCovariantChannel::loss(gamma), gkp::PhaseCovariantChannel::gain(gain)});
  c.phi = p.num("phi");
  c.sigma_d = std::sqrt(sd2);
  gkp::DephasingMethod method;
  const std::string& ms = p.str("method");
  if (ms == "auto") method = gkp::DephasingMethod::autoselect;
  else if (ms == "sub") method = gkp::DephasingMethod::sub;
  else if (ms == "super") method = gkp::DephasingMethod::super;
  else if (ms == "critical") method = gkp::DephasingMethod::critical;
  else if (ms == "numeric") method = gkp::DephasingMethod::numeric;
  else throw usage_error("--method must be auto, sub, super, critical or numeric");
  const gkp::PatchStats st = gkp::patch_stats(gkp::code_lattice({code}), gkp::Metric::identity(2));
  const auto tv = gkp::twirl_variance(c);
  const auto crit = gkp::critical_dephasing(c, st.d);
  const auto rep = gkp::dephasing_infidelity(c, st, 1, method);
  json row{{"code", code.name},
           {"delta", delta},
           {"delta_db", gkp::delta2_to_db(delta * delta)},
           {"loss", gamma},
           {"gain", gain},
           {"dephasing", sd2},
           {"sigma2", tv.sigma2},
           {"sigma_g2", tv.sigma_g2},
           {"critical_dephasing", crit.sigma_d2},
           {"regime", gkp::to_string(rep.regime)},
           {"entanglement_infidelity", rep.entanglement_infidelity},
           {"avg_gate_infidelity", rep.avg_gate_infidelity},
           {"validity_warning", rep.validity_warning}};
  if (gamma > 0.0) row["delta_db_opt_loss"] = gkp::delta2_to_db(gkp::delta_for_loss(gamma).x);
  return {row};
}

Rows run_readout_bin(const Params& p) {
  const gkp::GkpCode code = gkp::parse_code(p.str("code"));
  const double delta = delta_from(p);
  const double eta = p.num("eta");
  auto m = gkp::make_binned(code, delta, eta);
  if (p.has("bin")) m.b = p.num("bin");
  const auto s = gkp::binned_error_series(m);
  json row{{"code", code.name},
           {"delta_db", gkp::delta2_to_db(delta * delta)},
           {"eta", eta},
           {"alpha1", m.alpha1},
           {"bin", m.b},
           {"m_series", s.average},
           {"p10", s.p10},
           {"p01", s.p01},
           {"m_approx", gkp::binned_error_approx(m.alpha1, delta, eta)},
           {"s_max", s.s_max},
           {"tail_bound", s.tail_bound}};
  if (p.has("target")) {
    const auto r = gkp::required_efficiency(m.alpha1, delta, p.num("target"));
    row["target"] = p.num("target");
    row["eta_required"] = r.eta;
    row["eta_required_series"] = std::isnan(r.eta_series) ? json(nullptr) : json(r.eta_series);
    row["floor"] = r.floor;
  }
  return {row};
}

Rows run_readout_squeeze(const Params& p) {
  const double eta = p.num("eta");
  if (p.has("squeeze_db")) {
    const double r = gkp::squeeze_r_from_db(p.num("squeeze_db"));
    return {{{"eta", eta}, {"squeeze_db", p.num("squeeze_db")}, {"r", r}, {"eta_eff", gkp::squeeze_eta_eff(r, eta)}}};
  }
  const auto s = gkp::squeeze_for_target(eta, p.num("target"));
  return {{{"eta", eta}, {"target", p.num("target")}, {"r", s.r}, {"squeeze_db", s.s_db}}};
}

Rows run_readout_two_mode(const Params& p) {
  // g in rad/us; times in us.
  int given = p.has("g_rad_per_us") + p.has("g_cycles_mhz");
  if (given > 1) throw usage_error("give only one of --g-rad-per-us and --g-cycles-mhz");
  double g = 10.0;
  if (p.has("g_rad_per_us")) g = p.num("g_rad_per_us");
  if (p.has("g_cycles_mhz")) g = 2.0 * gkp::kPi * p.num("g_cycles_mhz");
  const double eta = p.num("eta"), target = p.num("target");
  std::vector<std::pair<std::string, gkp::Ancilla>> which;
  const std::string& a = p.str("ancilla");
  if (a == "vacuum" || a == "both") which.push_back({"vacuum", gkp::Ancilla::vacuum});
  if (a == "squeezed" || a == "both") which.push_back({"squeezed", gkp::Ancilla::position_squeezed});
  if (which.empty()) throw usage_error("--ancilla must be vacuum, squeezed or both");
  Rows rows;
  for (const auto& [name, anc] : which) {
    const double t = gkp::time_to_target(g, eta, target, anc);
    const double kappa = gkp::kappa_opt(t);
    const auto e = gkp::twomode_eta_eff({g, kappa, eta, t});
    rows.push_back({{"ancilla", name},
                    {"eta", eta},
                    {"target", target},
                    {"g_rad_per_us", g},
                    {"g_cycles_mhz", g / (2.0 * gkp::kPi)},
                    {"t_us", t},
                    {"kappa_rad_per_us", kappa},
                    {"kappa_cycles_mhz", kappa / (2.0 * gkp::kPi)},
                    {"g_t", g * t},
                    {"kappa_t", kappa * t},
                    {"eta_eff", anc == gkp::Ancilla::vacuum ? e.eta_eff : e.eta_eff_squeezed}});
  }
  return rows;
}

Rows run_pauli_ops(const Params& p) {
  const std::string& cs = p.str("code");
  const gkp::GkpCode code = gkp::parse_code(cs);
  const gkp::Pauli pauli = pauli_from(p);
  const int n_max = p.integer("n_max");
  gkp::PauliOpSeries s;
  if (p.str("method") == "closed") {
    if (cs == "square") s = gkp::pauli_op_coeffs(gkp::PauliSeriesKind::square, pauli, n_max);
    else if (cs == "hex") s = gkp::pauli_op_coeffs(gkp::PauliSeriesKind::hex, pauli, n_max);
    else if (cs.rfind("rect:", 0) == 0) {
      const double a = code.alpha[0] / gkp::kSqrtPi;
      s = gkp::pauli_op_coeffs(gkp::PauliSeriesKind::rect, pauli, n_max, a);
    } else {
      throw gkp::validation_error("closed forms exist for square, hex and rect codes; use --method quadrature");
    }
  } else if (p.str("method") == "quadrature") {
    s = gkp::pauli_op_coeffs_generic(code, pauli, n_max);
  } else {
    throw usage_error("--method must be closed or quadrature");
  }
  Rows rows;
  for (const auto& t : s.terms) {
    rows.push_back({{"pauli", std::string(1, gkp::pauli_char(pauli))},
                    {"i", t.i}, {"j", t.j}, {"v_q", t.v[0]}, {"v_p", t.v[1]}, {"coeff", t.coeff}});
  }
  return rows;
}

std::uint64_t seed_from(const Params& p) {
  if (p.has("seed")) {
    try {
      return std::stoull(p.str("seed"));
    } catch (const std::exception&) {
      throw usage_error("--seed expects an unsigned integer");
    }
  }
  if (const char* env = std::getenv("GKP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw usage_error("GKP_SEED must be an unsigned integer");
    }
  }
  return kDefaultSeed;
}

Rows run_oracle(const Params& p) {
  const std::string& check = p.str("check");
  const std::uint64_t seed = seed_from(p);
  auto want = [&](const char* c) { return check == "all" || check == c; };
  if (!(want("tail") || want("loss") || want("binned") || want("rs") || want("tableau"))) {
    throw usage_error("--check must be all, tail, loss, binned, rs or tableau");
  }
  Rows rows;
  auto add = [&](const std::string& name, double analytic, double oracle, double tol, bool pass) {
    rows.push_back({{"check", name}, {"analytic", analytic}, {"oracle", oracle}, {"tolerance", tol}, {"pass", pass}});
  };
  const auto sq = gkp::make_square();
  const auto lat = gkp::code_lattice({sq});
  const auto eye = gkp::Metric::identity(2);
  const auto st = gkp::patch_stats(lat, eye);
  if (want("tail")) {
    const double s = 0.3;
    const double est = gkp::gaussian_tail_estimate(st, s, gkp::TailMode::all_shells).value;
    const auto q = gkp::quad_tail_2d(lat, eye, s * s * gkp::Mat::Identity(2, 2));
    add("tail_square_sigma0.3", est, q.mass, q.error, q.mass <= est + q.error);
  }
  if (want("loss")) {
    const double delta = std::sqrt(gkp::db_to_delta2(12.0));
    const double s2 = gkp::loss_sigma2(delta, 0.01);
    const double est = gkp::logical_infidelity(s2, st, 1, gkp::TailMode::all_shells).entanglement_infidelity;
    const auto q = gkp::quad_tail_2d(lat, eye, s2 * gkp::Mat::Identity(2, 2));
    add("loss_exact_sigma_12dB_1pct", est, q.mass, 0.05, std::abs(est / q.mass - 1.0) < 0.05);
  }
  if (want("binned")) {
    const double delta = std::sqrt(gkp::db_to_delta2(12.0));
    const auto m = gkp::make_binned(sq, delta, 0.85);
    const double series = gkp::binned_error_series(m).average;
    const double quad = gkp::quad_binned_error(sq, delta, 0.85, m.b).average;
    add("binned_series_vs_quadrature", series, quad, 1e-8, std::abs(series - quad) <= 1e-8);
  }
  if (want("rs")) {
    const double k = 1.0, t = 2.0;
    const auto c = gkp::mc_rs_covariances(k, t, 1000, 10000, {seed, 0});
    const double exact = 1.0 - std::exp(-k * t);
    add("rs_E_R2_kt2", exact, c.e_r2, 3.0 * c.se_r2, std::abs(c.e_r2 - exact) <= 3.0 * c.se_r2);
  }
  if (want("tableau")) {
    std::mt19937_64 rng = gkp::Seed{seed, 1}.engine();
    int ok = 0;
    const int total = 50;
    for (int i = 0; i < total; ++i) {
      const auto c = gkp::random_clifford_circuit(1 + i % 5, 50, rng);
      ok += gkp::tableau_equiv(c, gkp::rewrite_circuit(c).circuit);
    }
    add("rewrite_tableau_equiv", total, ok, 0.0, ok == total);
  }
  return rows;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = {
      {"tables", "Ideal and approximate-QEC patch distance/degeneracy tables",
       {{"regime", "ideal", "ideal | approx | both"}, {"codes", "square,hex", "comma-separated code list"}},
       run_tables},
      {"gate", "Average gate infidelity of a Clifford gate",
       {{"code", "square", "square | hex | rect:a=<a> | custom:ax,ay,bx,by"},
        {"gate", "S", "gate expression, e.g. S^2, H@H*CZZ, R@R*CYY"},
        {"delta_db", "12", "envelope in dB"},
        {"delta", "", "envelope Delta (overrides --delta-db)"},
        {"regime", "ideal", "ideal | approx"},
        {"patch", "naive", "naive | modified (ideal regime)"},
        {"tail", "all_shells", "leading | all_shells"},
        {"sigma_convention", "tanh_half", "tanh_half | delta_over_sqrt2 (ideal regime)"},
        {"approx_sigma", "two_tanh", "two_tanh | delta (approx regime)"}},
       run_gate},
      {"noise", "Loss, gain and dephasing infidelity estimates",
       {{"code", "square", "code"},
        {"delta_db", "10", "envelope in dB"},
        {"delta", "", "envelope Delta (overrides --delta-db)"},
        {"loss", "0.01", "loss probability gamma"},
        {"dephasing", "0", "dephasing variance sigma_d^2"},
        {"gain", "none", "none | auto | <value>"},
        {"phi", "0", "static rotation angle"},
        {"method", "auto", "auto | sub | super | critical | numeric"}},
       run_noise},
      {"readout-bin", "Binned homodyne readout error",
       {{"code", "square", "code"},
        {"delta_db", "12", "envelope in dB"},
        {"delta", "", "envelope Delta (overrides --delta-db)"},
        {"eta", "1", "homodyne efficiency"},
        {"bin", "", "bin size (default cosh(Delta^2) alpha_1)"},
        {"target", "", "target error; reports the required efficiency"}},
       run_readout_bin},
      {"readout-squeeze", "Squeezing before homodyne detection",
       {{"eta", "0.7", "physical efficiency"},
        {"target", "0.85", "target effective efficiency"},
        {"squeeze_db", "", "squeezing in dB; reports eta_eff instead"}},
       run_readout_squeeze},
      {"readout-two-mode", "Two-mode continuous readout timing",
       {{"g_rad_per_us", "", "coupling g in rad/us (default 10)"},
        {"g_cycles_mhz", "", "coupling g/(2 pi) in MHz"},
        {"eta", "0.75", "detector efficiency"},
        {"target", "0.85", "target effective efficiency"},
        {"ancilla", "vacuum", "vacuum | squeezed | both"}},
       run_readout_two_mode},
      {"pauli-ops", "Displacement-series coefficients of ideal Pauli operators",
       {{"code", "square", "code"},
        {"pauli", "Z", "X | Y | Z"},
        {"n_max", "3", "index range"},
        {"method", "closed", "closed | quadrature"}},
       run_pauli_ops},
      {"oracle", "Cross-check analytic estimators against brute-force oracles",
       {{"check", "all", "all | tail | loss | binned | rs | tableau"}, {"seed", "", "MC seed (default GKP_SEED or 20240601)"}},
       run_oracle},
  };
  return cmds;
}

const Command& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw usage_error("unknown command '" + name + "'");
}

// ---------------------------------------------------------------------------
// Output.

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const json& v) {
  std::string s;
  if (v.is_null()) return "";
  if (v.is_string()) s = v.get<std::string>();
  else if (v.is_boolean()) s = v.get<bool>() ? "true" : "false";
  else if (v.is_number_integer()) s = std::to_string(v.get<long long>());
  else if (v.is_number()) s = format_number(v.get<double>());
  else s = v.dump();
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string to_csv(const Rows& rows) {
  std::vector<std::string> cols;
  for (const auto& r : rows)
    for (auto it = r.begin(); it != r.end(); ++it)
      if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << csv_field(cols[i]);
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      os << (i ? "," : "");
      if (r.contains(cols[i])) os << csv_field(r.at(cols[i]));
    }
    os << "\n";
  }
  return os.str();
}

std::string to_json(const std::string& command, const Params& p, const Rows& rows) {
  json params = json::object();
  for (const auto& [k, v] : p.values) params[k] = v;
  json doc{{"meta", {{"version", gkp::kVersion}, {"command", command}, {"params", params}}}, {"rows", rows}};
  return doc.dump(2) + "\n";
}

std::string render(const std::string& format, const std::string& command, const Params& p, const Rows& rows) {
  if (format == "json") return to_json(command, p, rows);
  if (format == "csv") return to_csv(rows);
  throw usage_error("--format must be json or csv");
}

// ---------------------------------------------------------------------------
// Sweeps.

std::vector<double> sweep_grid(double start, double stop, int count, const std::string& scale) {
  if (count < 1) throw usage_error("--count must be >= 1");
  if (count > 1 && !(start < stop)) throw usage_error("--start must be below --stop when --count > 1");
  std::vector<double> xs;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    if (scale == "linear") {
      xs.push_back(start + f * (stop - start));
    } else if (scale == "log") {
      if (!(start > 0.0 && stop > 0.0)) throw usage_error("log scale needs positive bounds");
      xs.push_back(start * std::pow(stop / start, f));
    } else if (scale == "dB") {
      // Uniform in dB; the parameter receives the power ratio 10^(-x/10).
      xs.push_back(std::pow(10.0, -(start + f * (stop - start)) / 10.0));
    } else {
      throw usage_error("--scale must be linear, log or dB");
    }
  }
  return xs;
}

Rows run_sweep(const Command& cmd, Params base, const std::string& param, const std::vector<double>& xs,
               int jobs) {
  if (!base.values.count(param)) throw usage_error("command '" + cmd.name + "' has no parameter '" + param + "'");
  std::vector<Rows> out(xs.size());
  auto work = [&](std::size_t i) {
    Params p = base;
    p.values[param] = format_number(xs[i]);
    try {
      for (auto r : cmd.run(p)) {
        json row{{param, xs[i]}};
        for (auto it = r.begin(); it != r.end(); ++it)
          if (it.key() != param) row[it.key()] = it.value();
        out[i].push_back(row);
      }
    } catch (const std::exception& e) {
      out[i].push_back({{param, xs[i]}, {"error", e.what()}});
    }
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(xs.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < xs.size(); i += jobs) work(i);
    });
  }
  for (auto& t : pool) t.join();
  Rows rows;
  for (auto& r : out) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

// Reads key=value lines ('#' / ';' comments) with CLI11's INI reader.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    std::string key = item.name;
    for (char& c : key)
      if (c == '-') c = '_';
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    kv[key] = value;
  }
  return kv;
}

struct Bound {
  CLI::App* app = nullptr;
  const Command* cmd = nullptr;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
};

Params merge_params(const Command& cmd, const Bound& b, const std::string& config) {
  Params p;
  for (const auto& o : cmd.opts) p.values[o.key] = o.def;
  if (!config.empty()) {
    for (const auto& [k, v] : read_config(config)) {
      if (p.values.count(k)) p.values[k] = v;
    }
  }
  for (const auto& [k, opt] : b.flag_opts)
    if (opt->count() > 0) p.values[k] = b.flag_values.at(k);
  return p;
}

void bind_options(Bound& b) {
  for (const auto& o : b.cmd->opts) {
    b.flag_values[o.key] = o.def;
    auto* opt = b.app->add_option("--" + Params::dashed(o.key), b.flag_values[o.key], o.help);
    if (!o.def.empty()) opt->default_str(o.def);
    b.flag_opts[o.key] = opt;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"GKP qubit code toolkit: patch geometry, gate noise, readout design"};
  app.set_version_flag("--version", gkp::kVersion);
  app.require_subcommand(1);

  std::string format = "json", config;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "json | csv")->capture_default_str();
    sub->add_option("--config", config, "key=value file merged under explicit flags");
  };

  std::vector<std::unique_ptr<Bound>> bound;
  auto make = [&](CLI::App* parent, const std::string& sub_name, const std::string& cmd_name) {
    const Command& cmd = find_command(cmd_name);
    auto b = std::make_unique<Bound>();
    b->cmd = &cmd;
    b->app = parent->add_subcommand(sub_name, cmd.help);
    add_common(b->app);
    bind_options(*b);
    bound.push_back(std::move(b));
  };
  make(&app, "tables", "tables");
  make(&app, "gate", "gate");
  make(&app, "noise", "noise");
  auto* readout = app.add_subcommand("readout", "Homodyne readout design");
  readout->require_subcommand(1);
  make(readout, "bin", "readout-bin");
  make(readout, "squeeze", "readout-squeeze");
  make(readout, "two-mode", "readout-two-mode");
  make(&app, "pauli-ops", "pauli-ops");
  make(&app, "oracle", "oracle");

  auto* rewrite = app.add_subcommand("rewrite", "Commute single-qubit Cliffords into a Clifford frame");
  std::string in_path = "-", rewrite_format = "text";
  rewrite->add_option("--in", in_path, "circuit file ('-' for stdin)")->capture_default_str();
  rewrite->add_option("--format", rewrite_format, "text | json")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter of a command; one output row per grid point");
  std::string sweep_cmd, sweep_param, sweep_scale = "linear";
  double sweep_start = 0.0, sweep_stop = 0.0;
  int sweep_count = 1, sweep_jobs = 1;
  std::vector<std::string> sweep_set;
  sweep->add_option("--command", sweep_cmd,
                    "gate | noise | readout-bin | readout-squeeze | readout-two-mode | pauli-ops")->required();
  sweep->add_option("--param", sweep_param, "parameter name, e.g. delta_db")->required();
  sweep->add_option("--start", sweep_start, "first grid value")->required();
  sweep->add_option("--stop", sweep_stop, "last grid value");
  sweep->add_option("--count", sweep_count, "number of grid points")->capture_default_str();
  sweep->add_option("--scale", sweep_scale, "linear | log | dB (dB: parameter gets 10^(-x/10))")->capture_default_str();
  sweep->add_option("--set", sweep_set, "fixed parameter key=value (repeatable)");
  sweep->add_option("--jobs", sweep_jobs, "worker threads")->capture_default_str();
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& b : bound) {
      if (!b->app->parsed()) continue;
      const Params p = merge_params(*b->cmd, *b, config);
      std::cout << render(format, b->cmd->name, p, b->cmd->run(p));
      return 0;
    }
    if (rewrite->parsed()) {
      std::string text;
      if (in_path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
      } else {
        std::ifstream f(in_path);
        if (!f) throw usage_error("cannot open circuit file '" + in_path + "'");
        text.assign(std::istreambuf_iterator<char>(f), {});
      }
      const auto r = gkp::rewrite_circuit(gkp::parse_circuit(text));
      if (rewrite_format == "text") {
        std::cout << gkp::format_circuit(r.circuit);
      } else if (rewrite_format == "json") {
        json frame = json::array();
        for (int e : r.frame.elements) frame.push_back(gkp::CliffordGroup::instance()[e].name);
        json doc{{"meta", {{"version", gkp::kVersion}, {"command", "rewrite"}, {"params", {{"in", in_path}}}}},
                 {"circuit", gkp::format_circuit(r.circuit)},
                 {"frame", frame}};
        std::cout << doc.dump(2) << "\n";
      } else {
        throw usage_error("--format must be text or json");
      }
      return 0;
    }
    if (sweep->parsed()) {
      const Command& cmd = find_command(sweep_cmd);
      Params base;
      for (const auto& o : cmd.opts) base.values[o.key] = o.def;
      if (!config.empty()) {
        for (const auto& [k, v] : read_config(config))
          if (base.values.count(k)) base.values[k] = v;
      }
      for (const auto& kv : sweep_set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw usage_error("--set expects key=value, got '" + kv + "'");
        std::string k = kv.substr(0, eq);
        for (char& c : k)
          if (c == '-') c = '_';
        if (!base.values.count(k)) throw usage_error("command '" + cmd.name + "' has no parameter '" + k + "'");
        base.values[k] = kv.substr(eq + 1);
      }
      const double stop = sweep->count("--stop") ? sweep_stop : sweep_start;
      const auto xs = sweep_grid(sweep_start, stop, sweep_count, sweep_scale);
      Params meta = base;
      meta.values["sweep_param"] = sweep_param;
      meta.values["sweep_start"] = format_number(sweep_start);
      meta.values["sweep_stop"] = format_number(stop);
      meta.values["sweep_count"] = std::to_string(sweep_count);
      meta.values["sweep_scale"] = sweep_scale;
      std::cout << render(format, "sweep:" + cmd.name, meta, run_sweep(cmd, base, sweep_param, xs, sweep_jobs));
      return 0;
    }
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const gkp::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
