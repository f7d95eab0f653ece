#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gkp/errors.hpp"
#include "gkp/linalg.hpp"

namespace gkp {

using IVec = Eigen::VectorXi;
using IMat = Eigen::MatrixXi;

inline constexpr double kTieTol = 1e-9;
inline constexpr double kDefaultEnumerationCap = 1e7;

struct Lattice {
  Mat generator;  // columns are basis vectors

  Lattice() = default;
  explicit Lattice(Mat g) : generator(std::move(g)) {
    if (generator.rows() != generator.cols() || generator.rows() == 0) {
      throw validation_error("lattice generator must be square and nonempty");
    }
    const double scale = std::pow(generator.cwiseAbs().maxCoeff(), generator.rows());
    if (std::abs(generator.determinant()) <= 1e-12 * std::max(scale, 1e-300)) {
      throw validation_error("lattice generator is singular");
    }
  }
  int dim() const { return static_cast<int>(generator.rows()); }
  Vec point(const IVec& z) const { return generator * z.cast<double>(); }
};

struct Metric {
  Mat m;

  Metric() = default;
  explicit Metric(Mat mm) : m(std::move(mm)) {
    if (!is_symmetric(m)) throw validation_error("metric must be symmetric");
    if (!is_positive_definite(m)) throw validation_error("metric must be positive definite");
    m = 0.5 * (m + m.transpose());
  }
  static Metric identity(int dim) { return Metric(Mat::Identity(dim, dim)); }
  double length(const Vec& v) const { return std::sqrt(std::max(0.0, v.dot(m * v))); }
};

struct LatticeVector {
  IVec z;
  Vec v;
  double length = 0.0;
};

struct Shell {
  double length = 0.0;
  int half_multiplicity = 0;
};

struct PatchStats {
  double d = 0.0;
  int a = 0;
  std::vector<Shell> shells;
};

namespace detail {

inline bool lex_less(const IVec& a, const IVec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Lagrange-Gauss reduction of a 2-D Gram matrix; returns the unimodular change of basis.
inline IMat gauss_reduce_2d(const Mat& q) {
  IMat u = IMat::Identity(2, 2);
  Eigen::Matrix<long long, 2, 2> ul = Eigen::Matrix<long long, 2, 2>::Identity();
  auto gram = [&q](const Eigen::Matrix<long long, 2, 2>& w, int i, int j) {
    Vec2 a = w.col(i).cast<double>(), b = w.col(j).cast<double>();
    return a.dot(q * b);
  };
  for (int it = 0; it < 200; ++it) {
    if (gram(ul, 0, 0) > gram(ul, 1, 1)) ul.col(0).swap(ul.col(1));
    const double mu = std::round(gram(ul, 0, 1) / gram(ul, 0, 0));
    if (mu == 0.0) break;
    ul.col(1) -= static_cast<long long>(mu) * ul.col(0);
    if (gram(ul, 1, 1) >= gram(ul, 0, 0)) break;
  }
  if (std::abs(ul.cast<double>().determinant()) != 1.0) return u;
  return ul.cast<int>();
}

// Iterates the integer box centred at `center` with half-widths `half` (in reduced coordinates).
template <class F>
void for_each_in_box(const Vec& center, const Vec& half, double cap, F&& visit) {
  const int n = static_cast<int>(center.size());
  IVec lo(n), hi(n);
  double count = 1.0;
  for (int i = 0; i < n; ++i) {
    lo[i] = static_cast<int>(std::ceil(center[i] - half[i]));
    hi[i] = static_cast<int>(std::floor(center[i] + half[i]));
    if (hi[i] < lo[i]) return;
    count *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (count > cap) {
    throw resource_error("lattice enumeration box has " + std::to_string(count) +
                         " points, above the cap of " + std::to_string(cap));
  }
  IVec z = lo;
  while (true) {
    visit(z);
    int k = 0;
    while (k < n) {
      if (z[k] < hi[k]) {
        ++z[k];
        break;
      }
      z[k] = lo[k];
      ++k;
    }
    if (k == n) break;
  }
}

}  // namespace detail

// Precomputed enumeration data for one (lattice, metric) pair.
class LatticeEnumerator {
 public:
  LatticeEnumerator(const Lattice& lat, const Metric& metric, double cap = kDefaultEnumerationCap)
      : lat_(lat), metric_(metric), cap_(cap) {
    if (metric.m.rows() != lat.dim()) throw validation_error("metric/lattice dimension mismatch");
    const int n = lat.dim();
    u_ = IMat::Identity(n, n);
    Mat q = lat.generator.transpose() * metric.m * lat.generator;
    if (n == 2) {
      u_ = detail::gauss_reduce_2d(q);
    }
    g_red_ = lat.generator * u_.cast<double>();
    q_red_ = g_red_.transpose() * metric.m * g_red_;
    Mat qinv = q_red_.inverse();
    dual_norm_ = qinv.diagonal().cwiseMax(0.0).cwiseSqrt();
    g_red_inv_ = g_red_.inverse();
  }

  const Lattice& lattice() const { return lat_; }
  const Metric& metric() const { return metric_; }

  // All nonzero lattice vectors with metric length <= radius*(1+1e-12).
  std::vector<LatticeVector> short_vectors(double radius) const {
    if (!(radius > 0.0)) throw validation_error("enumeration radius must be positive");
    const int n = lat_.dim();
    const double r = radius * (1.0 + 1e-12);
    std::vector<LatticeVector> out;
    detail::for_each_in_box(Vec::Zero(n), r * dual_norm_, cap_, [&](const IVec& zr) {
      if (zr.isZero()) return;
      Vec zd = zr.cast<double>();
      const double q = zd.dot(q_red_ * zd);
      if (q <= r * r) {
        LatticeVector lv;
        lv.z = u_ * zr;
        lv.v = lat_.point(lv.z);
        lv.length = std::sqrt(std::max(0.0, q));
        out.push_back(std::move(lv));
      }
    });
    std::sort(out.begin(), out.end(), [](const LatticeVector& a, const LatticeVector& b) {
      if (a.length != b.length) return a.length < b.length;
      return detail::lex_less(a.z, b.z);
    });
    return out;
  }

  // Closest lattice point to x; ties resolved by lexicographic order of integer coordinates.
  LatticeVector closest(const Vec& x) const {
    if (!x.allFinite()) throw validation_error("closest_lattice_vector: point must be finite");
    const Vec c = g_red_inv_ * x;
    IVec z0(c.size());
    for (int i = 0; i < c.size(); ++i) z0[i] = static_cast<int>(std::lround(c[i]));
    auto dist = [&](const IVec& zr) {
      Vec d = x - g_red_ * zr.cast<double>();
      return std::sqrt(std::max(0.0, d.dot(metric_.m * d)));
    };
    const double r0 = dist(z0);
    LatticeVector best;
    best.z = u_ * z0;
    best.length = r0;
    const double r = r0 * (1.0 + 1e-12) + 1e-300;
    detail::for_each_in_box(c, r * dual_norm_, cap_, [&](const IVec& zr) {
      const double dd = dist(zr);
      const IVec z = u_ * zr;
      const double tie = 1e-12 * std::max(best.length, 1e-300);
      if (dd < best.length - tie ||
          (std::abs(dd - best.length) <= tie && detail::lex_less(z, best.z))) {
        best.z = z;
        best.length = std::min(dd, best.length);
      }
    });
    best.v = lat_.point(best.z);
    return best;
  }

 private:
  Lattice lat_;
  Metric metric_;
  double cap_;
  IMat u_;
  Mat g_red_, g_red_inv_, q_red_;
  Vec dual_norm_;
};

inline std::vector<LatticeVector> enumerate_short_vectors(const Lattice& lat, const Metric& metric,
                                                          double radius,
                                                          double cap = kDefaultEnumerationCap) {
  return LatticeEnumerator(lat, metric, cap).short_vectors(radius);
}

inline LatticeVector closest_lattice_vector(const Lattice& lat, const Metric& metric,
                                            const Vec& point,
                                            double cap = kDefaultEnumerationCap) {
  return LatticeEnumerator(lat, metric, cap).closest(point);
}

struct CosetMinimum {
  unsigned coset = 0;  // bit i set when z_i is odd
  double length = 0.0;
  std::vector<LatticeVector> minimizers;
};

// Minimal-length vectors in each nonzero coset of lat / 2 lat.
inline std::vector<CosetMinimum> coset_minima(const Lattice& lat, const Metric& metric,
                                              double cap = kDefaultEnumerationCap) {
  const int n = lat.dim();
  if (n > 6) throw validation_error("coset enumeration supports dimension <= 6");
  const unsigned n_cosets = 1u << n;
  // Radius covering every coset: best representative with entries in {-1, 0, 1}.
  double radius = 0.0;
  for (unsigned c = 1; c < n_cosets; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (unsigned s = 0; s < n_cosets; ++s) {
      if ((s & ~c) != 0) continue;
      IVec z(n);
      for (int i = 0; i < n; ++i) z[i] = (c >> i & 1u) ? ((s >> i & 1u) ? -1 : 1) : 0;
      best = std::min(best, metric.length(lat.point(z)));
    }
    radius = std::max(radius, best);
  }
  auto vecs = LatticeEnumerator(lat, metric, cap).short_vectors(radius * (1.0 + kTieTol));
  std::vector<CosetMinimum> out(n_cosets - 1);
  for (unsigned c = 1; c < n_cosets; ++c) {
    out[c - 1].coset = c;
    out[c - 1].length = std::numeric_limits<double>::infinity();
  }
  for (auto& lv : vecs) {
    unsigned c = 0;
    for (int i = 0; i < n; ++i) {
      if ((lv.z[i] % 2 + 2) % 2 == 1) c |= 1u << i;
    }
    if (c == 0) continue;
    auto& cm = out[c - 1];
    if (lv.length < cm.length * (1.0 - kTieTol)) {
      cm.length = lv.length;
      cm.minimizers.clear();
      cm.minimizers.push_back(lv);
    } else if (lv.length <= cm.length * (1.0 + kTieTol)) {
      cm.minimizers.push_back(lv);
    }
  }
  return out;
}

// Voronoi-relevant vectors: cosets whose minimum is attained by a single +-pair.
inline std::vector<LatticeVector> relevant_vectors(const Lattice& lat, const Metric& metric,
                                                   double cap = kDefaultEnumerationCap) {
  std::vector<LatticeVector> out;
  for (auto& cm : coset_minima(lat, metric, cap)) {
    if (cm.minimizers.size() == 2) {
      for (auto& lv : cm.minimizers) out.push_back(lv);
    }
  }
  std::sort(out.begin(), out.end(), [](const LatticeVector& a, const LatticeVector& b) {
    if (a.length != b.length) return a.length < b.length;
    return detail::lex_less(a.z, b.z);
  });
  return out;
}

// Groups a list of per-vector lengths (both signs included) into shells.
inline PatchStats stats_from_lengths(std::vector<double> lengths) {
  if (lengths.empty()) throw validation_error("no lengths to form patch stats");
  std::sort(lengths.begin(), lengths.end());
  PatchStats ps;
  std::vector<int> counts;
  for (double l : lengths) {
    if (!ps.shells.empty() && l <= ps.shells.back().length * (1.0 + kTieTol)) {
      ++counts.back();
    } else {
      ps.shells.push_back({l, 0});
      counts.push_back(1);
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    ps.shells[i].half_multiplicity = std::max(1, counts[i] / 2);
  }
  ps.d = ps.shells.front().length;
  ps.a = ps.shells.front().half_multiplicity;
  return ps;
}

inline PatchStats patch_stats(const Lattice& lat, const Metric& metric,
                              double cap = kDefaultEnumerationCap) {
  std::vector<double> lengths;
  for (auto& lv : relevant_vectors(lat, metric, cap)) lengths.push_back(lv.length);
  return stats_from_lengths(std::move(lengths));
}

// Stats of the Voronoi cell of `lat` under `patch_metric` when the noise has covariance
// `noise_cov`: each facet at v sits at whitened distance (v'Mv)/sqrt(v'M S M v), doubled.
inline PatchStats facet_stats(const Lattice& lat, const Metric& patch_metric, const Mat& noise_cov,
                              double cap = kDefaultEnumerationCap) {
  std::vector<double> lengths;
  for (auto& lv : relevant_vectors(lat, patch_metric, cap)) {
    const Vec mv = patch_metric.m * lv.v;
    lengths.push_back(lv.v.dot(mv) / std::sqrt(mv.dot(noise_cov * mv)));
  }
  return stats_from_lengths(std::move(lengths));
}

enum class TailMode { leading, all_shells };

struct TailEstimate {
  double value = 0.0;
  bool warning = false;  // sigma >= d: outside the small-noise regime
};

inline TailEstimate gaussian_tail_estimate(const PatchStats& stats, double sigma, TailMode mode) {
  if (!(sigma > 0.0)) throw validation_error("sigma must be positive");
  TailEstimate t;
  t.warning = sigma >= stats.d;
  const double k = 1.0 / (2.0 * std::sqrt(2.0) * sigma);
  if (mode == TailMode::leading) {
    t.value = stats.a * std::erfc(stats.d * k);
  } else {
    for (auto& s : stats.shells) t.value += s.half_multiplicity * std::erfc(s.length * k);
  }
  return t;
}

inline std::string to_string(TailMode m) {
  return m == TailMode::leading ? "leading" : "all_shells";
}

}  // namespace gkp
