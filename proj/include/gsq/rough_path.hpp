#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/linalg.hpp"
#include "gsq/rng.hpp"
#include "gsq/tensor.hpp"

namespace gsq::roughpath {

/// Piecewise-linear path through points[k] at times[k].
struct PiecewiseLinearPath {
  std::vector<double> times;
  std::vector<RVec> points;

  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  std::size_t size() const { return points.size(); }
  RVec increment(std::size_t k) const { return points[k + 1] - points[k]; }

  double length() const {
    double l = 0.0;
    for (std::size_t k = 0; k + 1 < size(); ++k) l += increment(k).norm();
    return l;
  }
};

/// Step-N signature over grid indices [i, j]: the product of exp(segment
/// increment) by Chen's relation, exact for piecewise-linear paths.
inline TruncatedTensor signature(const PiecewiseLinearPath& x, int depth, std::size_t i, std::size_t j) {
  if (i > j || j >= x.size()) throw GridMismatchError("signature interval outside the path grid");
  TruncatedTensor s = TruncatedTensor::one(x.dim(), depth);
  for (std::size_t k = i; k < j; ++k) s = s * exp(TruncatedTensor::from_vector(x.increment(k), depth));
  return s;
}

inline TruncatedTensor signature(const PiecewiseLinearPath& x, int depth) {
  return signature(x, depth, 0, x.size() - 1);
}

/// Element 1 + v + M of the step-2 free nilpotent group G_2(R^d).
struct G2Element {
  RVec v;
  RMat m;

  static G2Element identity(int d) { return {RVec::Zero(d), RMat::Zero(d, d)}; }
  static G2Element from_tensor(const TruncatedTensor& t) {
    if (t.depth() < 2) throw ShapeMismatchError("need a tensor of depth >= 2");
    return {t.levels[1], t.level2()};
  }

  int dim() const { return static_cast<int>(v.size()); }
  RMat antisymmetric() const { return 0.5 * (m - m.transpose()); }

  /// Distance of the symmetric part of level 2 from (v (x) v) / 2.
  double membership_defect() const { return (0.5 * (m + m.transpose()) - 0.5 * v * v.transpose()).norm(); }

  G2Element operator*(const G2Element& o) const {
    if (o.dim() != dim()) throw ShapeMismatchError("G2 elements of different dimension");
    return {v + o.v, m + o.m + v * o.v.transpose()};
  }

  G2Element inverse() const { return {-v, -m + v * v.transpose()}; }
};

/// Dilation delta_r: level 1 by r, level 2 by r^2.
inline G2Element dilate(const G2Element& g, double r) { return {r * g.v, r * r * g.m}; }

inline void require_g2(const G2Element& g, double tol = 1e-9) {
  const double scale = 1.0 + g.v.squaredNorm() + g.m.norm();
  if (!(g.membership_defect() <= tol * scale)) throw NonGroupElementError("level 2 is not (v (x) v)/2 + antisymmetric");
}

/// Homogeneous norm max(|v|, |Anti(M)|_F^{1/2}). It is subadditive and
/// symmetric, hence d(g, h) = |g^{-1} h| is a left-invariant metric
/// equivalent to the Carnot-Caratheodory metric (the constants are not
/// computed).
inline double homogeneous_norm(const G2Element& g) {
  require_g2(g);
  return std::max(g.v.norm(), std::sqrt(g.antisymmetric().norm()));
}

/// |a^{-1} b|, with the product expanded so that a = b gives exactly 0.
inline double g2_distance(const G2Element& a, const G2Element& b) {
  const RVec dv = b.v - a.v;
  return homogeneous_norm({dv, b.m - a.m - a.v * dv.transpose()});
}

/// Step-2 rough path: group values x_t on a time grid.
struct RoughPathG2 {
  int d = 0;
  std::vector<double> times;
  std::vector<G2Element> values;

  std::size_t size() const { return values.size(); }
  /// x_{s,t} = x_s^{-1} x_t on grid indices.
  G2Element increment(std::size_t i, std::size_t j) const { return values[i].inverse() * values[j]; }

  double max_membership_defect() const {
    double m = 0.0;
    for (const auto& g : values) m = std::max(m, g.membership_defect());
    return m;
  }
};

/// Canonical lift of a piecewise-linear path, starting at the identity.
inline RoughPathG2 lift(const PiecewiseLinearPath& x) {
  RoughPathG2 r;
  r.d = x.dim();
  r.times = x.times;
  G2Element g = G2Element::identity(r.d);
  r.values.push_back(g);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const RVec dv = x.increment(k);
    g = g * G2Element{dv, 0.5 * dv * dv.transpose()};
    r.values.push_back(g);
  }
  return r;
}

inline void require_same_grid(const RoughPathG2& x, const RoughPathG2& y) {
  if (x.d != y.d || x.times.size() != y.times.size()) throw GridMismatchError("rough paths on different grids");
  for (std::size_t k = 0; k < x.times.size(); ++k)
    if (x.times[k] != y.times[k]) throw GridMismatchError("rough paths on different grids");
}

/// [sup over subdivisions of the grid of sum_i d(x_{t_i t_{i+1}}, y_{t_i t_{i+1}})^p]^{1/p},
/// by dynamic programming over the last partition point (O(n^2)).
inline double p_variation_distance(const RoughPathG2& x, const RoughPathG2& y, double p) {
  require_same_grid(x, y);
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  std::vector<double> best(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i)
      b = std::max(b, best[i] + std::pow(g2_distance(x.increment(i, j), y.increment(i, j)), p));
    best[j] = b;
  }
  return std::pow(best[n - 1], 1.0 / p);
}

/// The same supremum by enumerating all 2^(n-2) subdivisions (test oracle).
inline double p_variation_distance_enumerate(const RoughPathG2& x, const RoughPathG2& y, double p) {
  require_same_grid(x, y);
  const std::size_t n = x.size();
  if (n > 22) throw ResourceLimitError("enumeration limited to 22 grid points");
  if (n < 2) return 0.0;
  double best = 0.0;
  const std::size_t interior = n - 2;
  for (std::size_t mask = 0; mask < (std::size_t{1} << interior); ++mask) {
    double s = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (k < n - 1 && !(mask >> (k - 1) & 1)) continue;
      s += std::pow(g2_distance(x.increment(last, k), y.increment(last, k)), p);
      last = k;
    }
    best = std::max(best, s);
  }
  return std::pow(best, 1.0 / p);
}

/// Gaussian increments of a d-dimensional Brownian motion on [0, T] at
/// 2^level uniform steps.
inline std::vector<RVec> brownian_increments(int d, double T, int level, rng::Stream& s) {
  const std::size_t n = std::size_t{1} << level;
  const double scale = std::sqrt(T / static_cast<double>(n));
  std::vector<RVec> out(n, RVec(d));
  for (auto& w : out)
    for (int k = 0; k < d; ++k) w(k) = scale * s.normal();
  return out;
}

/// Sums blocks of consecutive fine increments down to 2^level steps.
inline std::vector<RVec> coarsen(const std::vector<RVec>& fine, int level) {
  const std::size_t n = std::size_t{1} << level;
  if (fine.empty() || fine.size() % n != 0) throw GridMismatchError("fine grid is not a dyadic refinement");
  const std::size_t f = fine.size() / n;
  std::vector<RVec> out(n, RVec::Zero(fine[0].size()));
  for (std::size_t k = 0; k < fine.size(); ++k) out[k / f] += fine[k];
  return out;
}

/// Enhanced Brownian motion approximant: the step-2 signature of the
/// piecewise-linear interpolation at dyadic level `level`, recorded at the
/// 2^record_level coarse grid times. Its antisymmetric level 2 is the
/// Levy-area approximant.
inline RoughPathG2 enhance_brownian(const std::vector<RVec>& fine, double T, int level, int record_level) {
  if (record_level > level) throw GridMismatchError("record level finer than the interpolation level");
  const std::vector<RVec> inc = coarsen(fine, level);
  const std::size_t stride = std::size_t{1} << (level - record_level);
  RoughPathG2 r;
  r.d = static_cast<int>(fine[0].size());
  G2Element g = G2Element::identity(r.d);
  r.values.push_back(g);
  r.times.push_back(0.0);
  for (std::size_t k = 0; k < inc.size(); ++k) {
    g = g * G2Element{inc[k], 0.5 * inc[k] * inc[k].transpose()};
    if ((k + 1) % stride == 0) {
      r.values.push_back(g);
      r.times.push_back(T * static_cast<double>(k + 1) / static_cast<double>(inc.size()));
    }
  }
  return r;
}

/// Levy area A_{01} of the increment over the whole grid.
inline double levy_area(const RoughPathG2& r, int i = 0, int j = 1) {
  return r.increment(0, r.size() - 1).antisymmetric()(i, j);
}

}  // namespace gsq::roughpath
