#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "gsq/brownian.hpp"
#include "gsq/errors.hpp"
#include "gsq/lie_core.hpp"
#include "gsq/parallel.hpp"
#include "gsq/repr.hpp"
#include "gsq/rng.hpp"

namespace gsq::roughpath {

/// Karhunen-Loeve truncation of Brownian motion at speed r on [0, t]:
///   b_i(s) = sqrt(2 r t) sum_{k<n} xi_ik sin((k+1/2) pi s / t) / ((k+1/2) pi),
/// a finite trigonometric sum, hence C^infinity.
struct KlDriver {
  double r = 1.0, t = 1.0;
  RMat xi;  // dim x n

  int dim() const { return static_cast<int>(xi.rows()); }
  int modes() const { return static_cast<int>(xi.cols()); }

  RVec value(double s) const {
    RVec b = RVec::Zero(dim());
    for (int k = 0; k < modes(); ++k) {
      const double w = (k + 0.5) * std::numbers::pi;
      b += xi.col(k) * (std::sin(w * s / t) / w);
    }
    return std::sqrt(2.0 * r * t) * b;
  }

  RVec velocity(double s) const {
    RVec b = RVec::Zero(dim());
    for (int k = 0; k < modes(); ++k) b += xi.col(k) * std::cos((k + 0.5) * std::numbers::pi * s / t);
    return std::sqrt(2.0 * r / t) * b;
  }

  /// b(t), using sin((k+1/2) pi) = (-1)^k.
  RVec endpoint() const {
    RVec b = RVec::Zero(dim());
    for (int k = 0; k < modes(); ++k) b += xi.col(k) * ((k % 2 ? -1.0 : 1.0) / ((k + 0.5) * std::numbers::pi));
    return std::sqrt(2.0 * r * t) * b;
  }
};

inline KlDriver sample_kl_driver(int dim, double r, double t, int n, rng::Stream& s) {
  if (n < 1) throw std::invalid_argument("mode count must be >= 1");
  KlDriver d;
  d.r = r;
  d.t = t;
  d.xi.resize(dim, n);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < n; ++k) d.xi(i, k) = s.normal();
  return d;
}

/// Driver velocity on the uniform grid s_m = t m / L (m = 0..L) through one
/// DCT-II (FFTW REDFT10) per coordinate:
///   Y_m = 2 sum_j x_j cos(pi (j + 1/2) m / L).
/// One plan is shared; execution on caller buffers is thread-safe.
class DctVelocity {
 public:
  explicit DctVelocity(int length) : length_(length) {
    std::vector<double> in(length), out(length);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_r2r_1d(length, in.data(), out.data(), FFTW_REDFT10, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_) throw std::runtime_error("FFTW could not create a DCT plan");
  }
  ~DctVelocity() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  DctVelocity(const DctVelocity&) = delete;
  DctVelocity& operator=(const DctVelocity&) = delete;

  int length() const { return length_; }

  /// grid(i, m) = b_i'(t m / L) for m = 0..L; the last column is b'(t) = 0.
  void operator()(const KlDriver& d, std::vector<double>& in, std::vector<double>& out, RMat& grid) const {
    if (d.modes() > length_) throw std::invalid_argument("DCT length below the mode count");
    in.assign(length_, 0.0);
    out.resize(length_);
    grid.resize(d.dim(), length_ + 1);
    const double scale = 0.5 * std::sqrt(2.0 * d.r / d.t);
    for (int i = 0; i < d.dim(); ++i) {
      std::fill(in.begin(), in.end(), 0.0);
      for (int k = 0; k < d.modes(); ++k) in[k] = d.xi(i, k);
      fftw_execute_r2r(plan_, in.data(), out.data());
      for (int m = 0; m < length_; ++m) grid(i, m) = scale * out[m];
      grid(i, length_) = 0.0;
    }
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  int length_;
  fftw_plan plan_ = nullptr;
};

/// Fourth-order Magnus step for X' = X A(s) from the values of A at the
/// start, midpoint and end of a step of size h:
///   Omega = h/6 (A0 + 4 Am + A1) + h^2/12 [A0, A1].
template <class M>
M magnus4(const M& a0, const M& am, const M& a1, double h) {
  return (h / 6.0) * (a0 + 4.0 * am + a1) + (h * h / 12.0) * (a0 * a1 - a1 * a0);
}

/// Smooth group path phi' = phi b'(s), phi(0) = X0, sampled on a uniform
/// grid of `steps` Magnus steps.
struct SmoothPathSample {
  KlDriver driver;
  std::vector<double> times;
  std::vector<repr::GroupElement> points;
};

inline SmoothPathSample smooth_path(const lie::AlgebraModel& a, const KlDriver& d, const Mat& x0, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  const DctVelocity dct(2 * steps);
  std::vector<double> in, out;
  RMat grid;
  dct(d, in, out, grid);
  SmoothPathSample p;
  p.driver = d;
  p.points.emplace_back(x0);
  p.times.push_back(0.0);
  const double h = d.t / steps;
  auto alg = [&](int m) {
    Mat w = Mat::Zero(a.matrix_dim, a.matrix_dim);
    for (int i = 0; i < a.dim(); ++i) w += grid(i, m) * a.ortho_basis[i];
    return w;
  };
  for (int m = 0; m < steps; ++m) {
    const Mat omega = magnus4(alg(2 * m), alg(2 * m + 1), alg(2 * m + 2), h);
    const Mat step = a.matrix_dim == 2 ? Mat(repr::su2_exp(omega)) : expm(omega);
    p.points.emplace_back(p.points.back().u * step);
    p.times.push_back(d.t * (m + 1) / steps);
  }
  return p;
}

struct SmoothOptions {
  int workers = 1;
  int steps_per_mode = 8;
  int min_steps = 64;
  int n_steps = 0;                // overrides the two above when > 0
  bool mc_normalization = true;   // divide by the Monte Carlo Z_{lambda,t,r,n}
  bool control_variate = false;
  std::uint64_t config_hash = 0;
};

/// Magnus step count. The endpoint error behaves like (r t n)^{5/2} / M^4
/// (measured constant below 1), so the last term keeps it near 1e-4.
inline int smooth_steps(double r, double t, int n_modes, const SmoothOptions& o) {
  if (o.n_steps > 0) return o.n_steps;
  const int accuracy = static_cast<int>(std::ceil(10.0 * std::pow(r * t * n_modes, 0.625)));
  return std::max({o.min_steps, o.steps_per_mode * n_modes, accuracy});
}

/// Smooth-path estimator of Z_n^{-1} E_n[ e^{I_t(h;phi)} conj(u~(phi_0)) v~(phi_t) ]
/// over the measure mu_n^r of Karhunen-Loeve paths with n modes and a Haar
/// start. The line integral is exact: phi^{-1} dphi = b'(s) ds, so it
/// equals form(b(t)). The h integral uses the trapezoid rule on the Magnus
/// grid.
///
/// Z_n is estimated by the basis average (1/d) sum_a of the h = 0 weights
/// for (e_a, e_a), which is Z_n for every unit v1 by Schur's lemma and has
/// lower variance than a single v1. With mc_normalization = false the
/// analytic Brownian value e^{-r t c / 2} is used instead. The control
/// variate is the one of brownian::fk_estimate; its mean is Z_n <u|v> e^{-i hbar t},
/// again by Schur's lemma.
inline brownian::FkResult smooth_estimate(const repr::Irrep& r, const brownian::FkQuery& query, double speed, double t,
                                          int n_modes, std::uint64_t n_samples, std::uint64_t seed,
                                          const SmoothOptions& opt = {}) {
  const lie::AlgebraModel& a = r.algebra();
  if (a.matrix_dim != 2) throw UnsupportedGroupError("smooth estimator implemented for SU(2)");
  if (!(speed > 0.0) || !(t > 0.0)) throw std::invalid_argument("r and t must be positive");
  if (n_modes < 1) throw std::invalid_argument("mode count must be >= 1");
  if (n_samples < 2) throw std::invalid_argument("need at least two samples");
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

  brownian::FkResult out;
  out.n_steps = smooth_steps(speed, t, n_modes, opt);
  const int steps = out.n_steps;
  const double h = t / steps;
  const double c_lambda = lie::dual_pairing(2.0 * r.lambda + r.roots->rho, r.roots->rho, *r.roots);
  out.z_analytic = std::exp(-0.5 * speed * t * c_lambda);

  const Vec form = brownian::action_form(*r.roots, r.lambda);
  brownian::require_imaginary(form);
  Eigen::Vector3d theta;
  std::vector<Eigen::Matrix2cd> basis;
  for (int k = 0; k < 3; ++k) {
    theta(k) = form(k).imag();
    basis.emplace_back(a.ortho_basis[k]);
  }
  std::vector<double> hbar(nh);
  for (std::size_t q = 0; q < nh; ++q) hbar[q] = brownian::haar_mean(r, query.hamiltonians[q]);

  const DctVelocity dct(2 * steps);
  const std::size_t stride = nh * np + np + 1;
  std::vector<cplx> values(n_samples * stride);
  const double d = r.dim;

  parallel_for(n_samples, opt.workers, [&](std::size_t sample) {
    rng::Stream s(seed, sample, rng::kSmooth);
    Eigen::Matrix2cd x = brownian::haar_su2(s);
    const Mat pi0 = repr::group_eval(r, repr::GroupElement(Mat(x)));
    const KlDriver drv = sample_kl_driver(3, speed, t, n_modes, s);
    std::vector<double> in, buf;
    RMat grid;
    dct(drv, in, buf, grid);
    auto alg = [&](int m) {
      return Eigen::Matrix2cd(grid(0, m) * basis[0] + grid(1, m) * basis[1] + grid(2, m) * basis[2]);
    };
    RVec mom(3);
    std::vector<double> hint(nh, 0.0);
    auto add_h = [&](double weight) {
      if (nh == 0) return;
      (*moment)(x, mom);
      for (std::size_t q = 0; q < nh; ++q)
        if (!query.hamiltonians[q].is_zero()) hint[q] += weight * query.hamiltonians[q].on_orbit(mom);
    };
    add_h(0.5);
    Eigen::Matrix2cd a0 = alg(0);
    for (int m = 0; m < steps; ++m) {
      const Eigen::Matrix2cd am = alg(2 * m + 1), a1 = alg(2 * m + 2);
      x = x * repr::su2_exp(magnus4(a0, am, a1, h));
      a0 = a1;
      add_h(m + 1 == steps ? 0.5 : 1.0);
    }
    const double line = theta.dot(drv.endpoint());
    const Mat pit = repr::group_eval(r, repr::GroupElement(Mat(x)));
    const Vec w_start = pi0 * r.hw_vector, w_end = pit * r.hw_vector;
    const cplx phase = std::exp(I_unit * line);
    cplx* row = &values[sample * stride];
    for (std::size_t p = 0; p < np; ++p) {
      const cplx ends = d * std::conj(w_start.dot(query.pairs[p].first)) * w_end.dot(query.pairs[p].second);
      row[nh * np + p] = phase * ends;
      for (std::size_t q = 0; q < nh; ++q) row[q * np + p] = phase * std::exp(-I_unit * (h * hint[q])) * ends;
    }
    // (1/d) sum_a conj(e_a~(phi_0)) e_a~(phi_t) = <w_end | w_start>
    row[stride - 1] = phase * w_end.dot(w_start);
  });

  std::vector<cplx> zs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) zs[i] = values[i * stride + stride - 1];
  out.z = brownian::summarize(zs);
  const double inv_z = 1.0 / out.z_analytic;

  auto finish = [&](brownian::McEstimate e) {
    e.seed = seed;
    e.config_hash = opt.config_hash;
    return e;
  };
  auto normalize = [&](const std::vector<cplx>& col) {
    if (opt.mc_normalization) return brownian::summarize_ratio(col, zs);
    brownian::McEstimate e = brownian::summarize(col);
    e.value *= inv_z;
    e.std_error *= inv_z;
    return e;
  };
  out.plain.assign(nh, std::vector<brownian::McEstimate>(np));
  out.estimates.assign(nh, std::vector<brownian::McEstimate>(np));
  std::vector<cplx> col(n_samples);
  for (std::size_t q = 0; q < nh; ++q)
    for (std::size_t p = 0; p < np; ++p) {
      for (std::size_t i = 0; i < n_samples; ++i) col[i] = values[i * stride + q * np + p];
      out.plain[q][p] = finish(normalize(col));
      if (!opt.control_variate || query.hamiltonians[q].is_zero()) {
        out.estimates[q][p] = out.plain[q][p];
        continue;
      }
      const cplx shift = std::exp(-I_unit * (hbar[q] * t));
      for (std::size_t i = 0; i < n_samples; ++i) col[i] -= shift * values[i * stride + nh * np + p];
      brownian::McEstimate cv = normalize(col);
      cv.value += query.pairs[p].first.dot(query.pairs[p].second) * shift;
      out.estimates[q][p] = finish(cv);
    }
  return out;
}

inline brownian::McEstimate smooth_measure_estimator(const repr::Irrep& r, const Vec& u, const Vec& v,
                                                     const quantization::OrbitFunction& h, double speed, double t,
                                                     int n_modes, std::uint64_t n_samples, std::uint64_t seed,
                                                     const SmoothOptions& opt = {}) {
  brownian::FkQuery q;
  q.hamiltonians = {h};
  q.pairs = {{u, v}};
  return smooth_estimate(r, q, speed, t, n_modes, n_samples, seed, opt).estimates[0][0];
}

}  // namespace gsq::roughpath
