#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/haar_quadrature.hpp"
#include "gsq/lie_core.hpp"
#include "gsq/orbit_function.hpp"
#include "gsq/parallel.hpp"
#include "gsq/repr.hpp"
#include "gsq/rng.hpp"

namespace gsq::brownian {

using quantization::OrbitFunction;
using repr::GroupElement;
using repr::Irrep;

/// Discrete Brownian path X_{k+1} = X_k exp(W_k) on a uniform grid.
struct GroupPath {
  std::vector<double> times;
  std::vector<GroupElement> points;
  std::vector<Vec> log_increments;  // coordinates of W_k
  double r = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;

  std::size_t n_steps() const { return log_increments.size(); }

  /// Largest deviation between the stored points and the product of
  /// exponentials rebuilt from X_0.
  double reconstruction_defect(const lie::AlgebraModel& a) const {
    Mat x = points.front().u;
    double worst = 0.0;
    for (std::size_t k = 0; k < log_increments.size(); ++k) {
      x = x * repr::exp_group(a, log_increments[k]).u;
      worst = std::max(worst, (x - points[k + 1].u).norm());
    }
    return worst;
  }
};

/// Haar-uniform SU(2) element from a normalized 4-vector of Gaussians
/// (the unit quaternions are uniform on S^3).
inline Eigen::Matrix2cd haar_su2(rng::Stream& s) {
  double q[4];
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : q) {
      x = s.normal();
      n2 += x * x;
    }
  } while (n2 < 1e-300);
  const double inv = 1.0 / std::sqrt(n2);
  const cplx a(q[0] * inv, q[3] * inv), b(q[2] * inv, q[1] * inv);
  Eigen::Matrix2cd u;
  u << a, -std::conj(b), b, std::conj(a);
  return u;
}

/// Haar-uniform element of SU(n): QR of a complex Ginibre matrix with the
/// phases of R divided out, then the determinant rotated away.
inline Mat haar_sample(const lie::AlgebraModel& a, rng::Stream& s) {
  if (a.matrix_dim == 2) return haar_su2(s);
  const int n = a.matrix_dim;
  Mat z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx(s.normal(), s.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  const Mat rr = qr.matrixQR();
  for (int j = 0; j < n; ++j) q.col(j) *= rr(j, j) / std::abs(rr(j, j));
  const cplx det = q.determinant();
  q.col(0) /= det;
  return q;
}

inline void draw_increment(rng::Stream& s, double scale, Vec& w) {
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = scale * s.normal();
}

/// Brownian motion at speed r: W_k ~ N(0, r dt I) in the orthonormal basis,
/// start X_0 Haar-uniform. Stream (seed, path_index) in the Brownian domain.
inline GroupPath sample_bm(const lie::AlgebraModel& a, double r, double t_max, int n_steps, std::uint64_t seed,
                           std::uint64_t path_index = 0) {
  if (!(r > 0.0)) throw std::invalid_argument("speed r must be positive");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  rng::Stream s(seed, path_index, rng::kBrownian);
  GroupPath p;
  p.r = r;
  p.seed = seed;
  p.index = path_index;
  const double dt = t_max / n_steps, scale = std::sqrt(r * dt);
  p.points.emplace_back(haar_sample(a, s));
  p.times.push_back(0.0);
  Vec w(a.dim());
  for (int k = 0; k < n_steps; ++k) {
    draw_increment(s, scale, w);
    p.log_increments.push_back(w);
    p.points.push_back(p.points.back() * repr::exp_group(a, w));
    p.times.push_back(t_max * (k + 1) / n_steps);
  }
  return p;
}

/// Values of a form on the orthonormal basis.
inline Vec form_coefficients(const lie::CartanRootData& d, const lie::Weight& w) {
  const int n = d.algebra->dim();
  Vec c(n);
  for (int k = 0; k < n; ++k) c(k) = d.evaluate(w, Vec::Unit(n, k));
  return c;
}

/// Coefficients of the line-integral term of the action. With alpha =
/// -(lambda + rho) the magnetic Laplacian of module harmonic is
/// -sum_k (X_k^R - alpha(X_k))^2, whose Feynman-Kac weight is
/// exp(-int alpha(X^{-1} dX)); the integrand is therefore lambda + rho.
inline Vec action_form(const lie::CartanRootData& d, const lie::Weight& lambda) {
  return form_coefficients(d, lambda + d.rho);
}

inline void require_imaginary(const Vec& form) {
  for (Eigen::Index k = 0; k < form.size(); ++k)
    if (std::abs(form(k).real()) > 1e-12 * std::max(1.0, std::abs(form(k))))
      throw NonImaginaryFormError("form is not iR-valued on the algebra");
}

/// Sum of form(W_k) over the first `upto` increments. For geodesic
/// increments X^{-1} dX = W_k ds exactly, so this is the Stratonovich sum.
inline cplx stratonovich_line_integral(const Vec& form, const GroupPath& p, std::size_t upto) {
  require_imaginary(form);
  if (upto > p.n_steps()) throw TimeOffGridError("step index beyond the path");
  cplx s = 0.0;
  for (std::size_t k = 0; k < upto; ++k) s += (form.array() * p.log_increments[k].array()).sum();
  return cplx(0.0, s.imag());
}

inline cplx stratonovich_line_integral(const Vec& form, const GroupPath& p) {
  return stratonovich_line_integral(form, p, p.n_steps());
}

inline cplx stratonovich_line_integral(const lie::CartanRootData& d, const lie::Weight& w, const GroupPath& p) {
  return stratonovich_line_integral(form_coefficients(d, w), p);
}

inline std::size_t grid_index(const GroupPath& p, double t) {
  const double dt = p.times.back() / static_cast<double>(p.n_steps());
  const double k = std::round(t / dt);
  if (k < 0 || k > static_cast<double>(p.n_steps()) || std::abs(k * dt - t) > 1e-9 * std::max(1.0, t))
    throw TimeOffGridError("t = " + std::to_string(t) + " is not on the path grid");
  return static_cast<std::size_t>(k);
}

/// I_t(h; X): line integral of the action form minus i times the
/// trapezoid rule for int_0^t h^(X_s) ds.
inline cplx action_functional(const Irrep& r, const OrbitFunction& h, const GroupPath& p, double t) {
  const std::size_t n = grid_index(p, t);
  const cplx line = stratonovich_line_integral(action_form(*r.roots, r.lambda), p, n);
  if (n == 0) return line;
  const double dt = t / static_cast<double>(n);
  double integral = 0.0;
  for (std::size_t k = 0; k <= n; ++k) integral += (k == 0 || k == n ? 0.5 : 1.0) * h.lift(p.points[k]);
  return line - I_unit * (dt * integral);
}

struct McEstimate {
  cplx value;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

/// Mean and standard error of per-sample values (index order reduction).
inline McEstimate summarize(const std::vector<cplx>& x, std::size_t stride = 1, std::size_t offset = 0) {
  const std::size_t n = x.size() / stride;
  McEstimate e;
  e.n_paths = n;
  cplx sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i * stride + offset];
  e.value = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += std::norm(x[i * stride + offset] - e.value);
  e.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return e;
}

/// Ratio mean(x) / mean(z) with a delta-method standard error.
inline McEstimate summarize_ratio(const std::vector<cplx>& x, const std::vector<cplx>& z) {
  const McEstimate ex = summarize(x), ez = summarize(z);
  if (std::abs(ez.value) == 0.0) throw DivergenceError("normalization estimate vanished");
  McEstimate e = ex;
  e.value = ex.value / ez.value;
  double ss = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) ss += std::norm(x[i] - e.value * z[i]);
  e.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) / std::abs(ez.value) : 0.0;
  return e;
}

struct FkOptions {
  int workers = 1;
  double steps_per_unit = 1024.0;  // steps per unit of diffused time r t
  int n_steps = 0;                 // overrides steps_per_unit when > 0
  bool mc_normalization = false;   // divide by the Monte Carlo Z instead of e^{-r t c/2}
  bool control_variate = false;    // subtract the h = 0 weight, whose mean is known
  int substeps = 1;                // Gaussian draws summed into each group step
  std::uint64_t config_hash = 0;
};

inline int fk_steps(double r, double t, const FkOptions& o) {
  if (o.n_steps > 0) return o.n_steps;
  return std::max(1, static_cast<int>(std::ceil(r * t * o.steps_per_unit - 1e-9)));
}

/// Several Hamiltonians and (u, v) pairs evaluated on one set of paths.
struct FkQuery {
  std::vector<OrbitFunction> hamiltonians;
  std::vector<std::pair<Vec, Vec>> pairs;
};

struct FkResult {
  int n_steps = 0;
  double z_analytic = 0.0;                       // e^{-r t c_lambda / 2}
  McEstimate z;                                  // unnormalized, h = 0, v1 = v_lambda
  std::vector<std::vector<McEstimate>> plain;    // [h][pair], no control variate
  std::vector<std::vector<McEstimate>> estimates;  // [h][pair], as configured
};

/// Haar mean of h^, exact at the default quadrature order.
inline double haar_mean(const Irrep& r, const OrbitFunction& h) {
  const auto q = quantization::haar_quadrature(std::max(1, std::max(h.band, 0) + 1));
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * h.lift(q.nodes[i]);
  (void)r;
  return s;
}

/// With substeps = m each group step sums m draws of variance r dt / m, so a
/// run with (n, m = 2) sees the same Brownian motion as a run with (2n, 1):
/// the pair isolates the effect of the step size.
///
/// Feynman-Kac-Ito estimator of
///   Z^{-1} E[ e^{I_t(h;B)} conj(u~(B_0)) v~(B_t) ],  B ~ mu^r.
/// Per-path values depend only on (seed, path index); the reduction runs in
/// path order, so results are identical for any worker count.
///
/// With control_variate the estimator is
///   Z^{-1} mean( e^{L} conj(u~) v~ (e^{-i H} - e^{-i hbar t}) ) + <u|v> e^{-i hbar t},
/// L the line integral, H = int h^, hbar the Haar mean of h^; the
/// subtracted term has mean Z <u|v> e^{-i hbar t} by Schur's lemma. For
/// h = 0 it would cancel the estimate exactly, so it is skipped there.
inline FkResult fk_estimate(const Irrep& r, const FkQuery& query, double speed, double t, std::uint64_t n_paths,
                            std::uint64_t seed, const FkOptions& opt = {}) {
  const lie::AlgebraModel& a = r.algebra();
  if (a.matrix_dim != 2) throw UnsupportedGroupError("Brownian estimator implemented for SU(2)");
  if (!(speed > 0.0) || !(t > 0.0)) throw std::invalid_argument("r and t must be positive");
  if (n_paths < 2) throw std::invalid_argument("need at least two paths");
  for (const auto& [u, v] : query.pairs) {
    repr::require_dim(r, u);
    repr::require_dim(r, v);
  }
  const std::size_t nh = query.hamiltonians.size(), np = query.pairs.size();
  std::shared_ptr<const quantization::MomentMap> moment;
  for (const auto& h : query.hamiltonians) {
    if (!moment) moment = h.moment;
    if (h.moment != moment) throw std::invalid_argument("Hamiltonians must share one moment map");
  }

  FkResult out;
  out.n_steps = fk_steps(speed, t, opt);
  const int n = out.n_steps;
  const int sub = std::max(1, opt.substeps);
  const double dt = t / n, scale = std::sqrt(speed * dt / sub);
  const double c_lambda = lie::dual_pairing(2.0 * r.lambda + r.roots->rho, r.roots->rho, *r.roots);
  out.z_analytic = std::exp(-0.5 * speed * t * c_lambda);
  const double inv_z = 1.0 / out.z_analytic;

  const Vec form = action_form(*r.roots, r.lambda);
  require_imaginary(form);
  Eigen::Vector3d theta;
  std::vector<Eigen::Matrix2cd> basis;
  for (int k = 0; k < 3; ++k) {
    theta(k) = form(k).imag();
    basis.emplace_back(a.ortho_basis[k]);
  }
  std::vector<double> hbar(nh);
  for (std::size_t q = 0; q < nh; ++q) hbar[q] = haar_mean(r, query.hamiltonians[q]);

  // Per path: [X_{h,p} for all h, p] [Y_p for all p] [z].
  const std::size_t stride = nh * np + np + 1;
  std::vector<cplx> values(n_paths * stride);
  const double d = r.dim;

  parallel_for(n_paths, opt.workers, [&](std::size_t path) {
    rng::Stream s(seed, path, rng::kBrownian);
    Eigen::Matrix2cd x = haar_su2(s);
    const Mat pi0 = repr::group_eval(r, GroupElement(Mat(x)));
    RVec m(3);
    std::vector<double> hint(nh, 0.0);
    auto add_h = [&](double weight) {
      if (nh == 0) return;
      (*moment)(x, m);
      for (std::size_t q = 0; q < nh; ++q)
        if (!query.hamiltonians[q].is_zero()) hint[q] += weight * query.hamiltonians[q].on_orbit(m);
    };
    add_h(0.5);
    double line = 0.0;
    for (int k = 0; k < n; ++k) {
      double w0 = 0.0, w1 = 0.0, w2 = 0.0;
      for (int j = 0; j < sub; ++j) {
        w0 += scale * s.normal();
        w1 += scale * s.normal();
        w2 += scale * s.normal();
      }
      line += theta(0) * w0 + theta(1) * w1 + theta(2) * w2;
      x = x * repr::su2_exp(w0 * basis[0] + w1 * basis[1] + w2 * basis[2]);
      add_h(k + 1 == n ? 0.5 : 1.0);
    }
    const Mat pit = repr::group_eval(r, GroupElement(Mat(x)));
    const Vec w_start = pi0 * r.hw_vector, w_end = pit * r.hw_vector;
    const cplx phase = std::exp(I_unit * line);
    cplx* row = &values[path * stride];
    for (std::size_t p = 0; p < np; ++p) {
      // conj(u~(B_0)) v~(B_t) = d conj(<w0|u>) <wt|v>
      const cplx ends = d * std::conj(w_start.dot(query.pairs[p].first)) * w_end.dot(query.pairs[p].second);
      row[nh * np + p] = phase * ends;
      for (std::size_t q = 0; q < nh; ++q) row[q * np + p] = phase * std::exp(-I_unit * (dt * hint[q])) * ends;
    }
    row[stride - 1] = phase * d * std::conj(w_start.dot(r.hw_vector)) * w_end.dot(r.hw_vector);
  });

  std::vector<cplx> zs(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) zs[i] = values[i * stride + stride - 1];
  out.z = summarize(zs);

  auto finish = [&](McEstimate e) {
    e.seed = seed;
    e.config_hash = opt.config_hash;
    return e;
  };
  out.plain.assign(nh, std::vector<McEstimate>(np));
  out.estimates.assign(nh, std::vector<McEstimate>(np));
  std::vector<cplx> col(n_paths);
  for (std::size_t q = 0; q < nh; ++q)
    for (std::size_t p = 0; p < np; ++p) {
      for (std::size_t i = 0; i < n_paths; ++i) col[i] = values[i * stride + q * np + p];
      McEstimate plain;
      if (opt.mc_normalization) {
        plain = summarize_ratio(col, zs);
      } else {
        plain = summarize(col);
        plain.value *= inv_z;
        plain.std_error *= inv_z;
      }
      out.plain[q][p] = finish(plain);
      if (!opt.control_variate || query.hamiltonians[q].is_zero()) {
        out.estimates[q][p] = out.plain[q][p];
        continue;
      }
      const cplx shift = std::exp(-I_unit * (hbar[q] * t));
      for (std::size_t i = 0; i < n_paths; ++i) col[i] -= shift * values[i * stride + nh * np + p];
      McEstimate cv = summarize(col);
      cv.value = cv.value * inv_z + query.pairs[p].first.dot(query.pairs[p].second) * shift;
      cv.std_error *= inv_z;
      out.estimates[q][p] = finish(cv);
    }
  return out;
}

/// Single-query form.
inline McEstimate fk_estimator(const Irrep& r, const Vec& u, const Vec& v, const OrbitFunction& h, double speed,
                               double t, std::uint64_t n_paths, std::uint64_t seed, const FkOptions& opt = {}) {
  FkQuery q;
  q.hamiltonians = {h};
  q.pairs = {{u, v}};
  return fk_estimate(r, q, speed, t, n_paths, seed, opt).estimates[0][0];
}

}  // namespace gsq::brownian
