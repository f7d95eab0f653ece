#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gkp/errors.hpp"

namespace gkp {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
};

namespace detail {

inline double gsl_trampoline(double x, void* p) {
  return (*static_cast<const std::function<double(double)>*>(p))(x);
}

struct gsl_handler_guard {
  gsl_error_handler_t* previous;
  gsl_handler_guard() : previous(gsl_set_error_handler_off()) {}
  ~gsl_handler_guard() { gsl_set_error_handler(previous); }
};

struct workspace_deleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

}  // namespace detail

// Adaptive Gauss-Kronrod (GSL QAGP when breakpoints are given, QAG otherwise).
// The workspace is local to the call, so concurrent calls are independent.
inline QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                            double epsabs, double epsrel, std::vector<double> breakpoints = {},
                            std::size_t limit = 2000) {
  if (!(a < b)) return {0.0, 0.0};
  detail::gsl_handler_guard guard;
  std::unique_ptr<gsl_integration_workspace, detail::workspace_deleter> ws(
      gsl_integration_workspace_alloc(limit));
  gsl_function F;
  F.function = &detail::gsl_trampoline;
  F.params = const_cast<std::function<double(double)>*>(&f);
  QuadResult r;
  int status = 0;
  if (breakpoints.empty()) {
    status = gsl_integration_qag(&F, a, b, epsabs, epsrel, limit, GSL_INTEG_GAUSS31, ws.get(),
                                 &r.value, &r.abs_error);
  } else {
    std::vector<double> pts{a};
    for (double p : breakpoints) {
      if (p > a && p < b) pts.push_back(p);
    }
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    status = gsl_integration_qagp(&F, pts.data(), pts.size(), epsabs, epsrel, limit, ws.get(),
                                  &r.value, &r.abs_error);
  }
  // Roundoff-limited termination still yields a usable estimate; only hard failures throw.
  if (status != GSL_SUCCESS && status != GSL_EROUND && status != GSL_EMAXITER) {
    throw domain_error(std::string("quadrature failed: ") + gsl_strerror(status));
  }
  return r;
}

struct MinResult {
  double x = 0.0;
  double value = 0.0;
};

// Brent minimization on [lo, hi] to roughly `bits` bits of relative precision.
inline MinResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                 int bits = 40) {
  std::uintmax_t max_iter = 500;
  auto r = boost::math::tools::brent_find_minima(f, lo, hi, bits, max_iter);
  return {r.first, r.second};
}

// Root of f on a sign-changing bracket [lo, hi] via TOMS 748.
inline double find_root(const std::function<double(double)>& f, double lo, double hi,
                        double rel_tol = 1e-12) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw domain_error("root not bracketed");
  std::uintmax_t max_iter = 300;
  auto tol = [rel_tol](double a, double b) {
    return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b)) ||
           std::abs(a - b) < std::numeric_limits<double>::min();
  };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (r.first + r.second);
}

// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Probability that N(mu, sigma^2) lands in [lo, hi], computed from the nearer tail for accuracy.
inline double normal_interval(double mu, double sigma, double lo, double hi) {
  const double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
  if (a >= 0) return 0.5 * (std::erfc(a / std::sqrt(2.0)) - std::erfc(b / std::sqrt(2.0)));
  if (b <= 0) return 0.5 * (std::erfc(-b / std::sqrt(2.0)) - std::erfc(-a / std::sqrt(2.0)));
  return 1.0 - 0.5 * std::erfc(-a / std::sqrt(2.0)) - 0.5 * std::erfc(b / std::sqrt(2.0));
}

inline double db_to_delta2(double db) { return std::pow(10.0, -db / 10.0); }
inline double delta2_to_db(double d2) { return -10.0 * std::log10(d2); }

}  // namespace gkp
