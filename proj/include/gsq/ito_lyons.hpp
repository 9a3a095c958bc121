#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "gsq/errors.hpp"
#include "gsq/lie_core.hpp"
#include "gsq/linalg.hpp"
#include "gsq/rough_path.hpp"

namespace gsq::roughpath {

/// V(y) as an e x d matrix: dy = V(y) dx.
using VectorField = std::function<void(const RVec& y, RMat& v)>;

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_dt = 1e-3;
  std::size_t max_steps = 5000000;
};

namespace detail {

using State = std::vector<double>;

/// Adaptive dopri5 from t0 to t1 for y' = V(y) xdot(t). Step-size underflow
/// or a non-finite state is reported as divergence.
inline void integrate(const VectorField& field, const std::function<void(double, RVec&)>& xdot, State& y,
                      double t0, double t1, const OdeOptions& o, int d) {
  namespace ode = boost::numeric::odeint;
  const auto e = static_cast<Eigen::Index>(y.size());
  RMat v(e, d);
  RVec dx(d);
  auto system = [&](const State& x, State& dxdt, double t) {
    const Eigen::Map<const RVec> xs(x.data(), e);
    field(xs, v);
    xdot(t, dx);
    Eigen::Map<RVec>(dxdt.data(), e) = v * dx;
  };
  auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(o.abs_tol, o.rel_tol);
  double t = t0, dt = std::min(o.initial_dt, t1 - t0);
  std::size_t steps = 0;
  while (t < t1) {
    if (t + dt > t1) dt = t1 - t;
    if (stepper.try_step(system, y, t, dt) == ode::fail) {
      if (dt < 1e-14 * std::max(1.0, std::abs(t)))
        throw DivergenceError("step size underflow at t = " + std::to_string(t));
      continue;
    }
    if (++steps > o.max_steps) throw DivergenceError("step budget exhausted at t = " + std::to_string(t));
    for (double yi : y)
      if (!std::isfinite(yi)) throw DivergenceError("non-finite state at t = " + std::to_string(t));
  }
}

}  // namespace detail

/// Solution of dy = V(y) dx along a piecewise-linear driver, at every grid
/// point (each segment has constant velocity).
inline std::vector<RVec> solve_piecewise_linear(const VectorField& field, const RVec& y0, const PiecewiseLinearPath& x,
                                                const OdeOptions& o = {}) {
  std::vector<RVec> out{y0};
  detail::State y(y0.data(), y0.data() + y0.size());
  const int d = x.dim();
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double h = x.times[k + 1] - x.times[k];
    const RVec vel = x.increment(k) / h;
    detail::integrate(field, [&](double, RVec& dx) { dx = vel; }, y, x.times[k], x.times[k + 1], o, d);
    out.emplace_back(Eigen::Map<const RVec>(y.data(), y0.size()));
  }
  return out;
}

/// Solution along a smooth driver given by its velocity, at the requested
/// increasing times (the first must be the start time).
inline std::vector<RVec> solve_smooth(const VectorField& field, const RVec& y0,
                                      const std::function<void(double, RVec&)>& xdot, int d,
                                      const std::vector<double>& times, const OdeOptions& o = {}) {
  std::vector<RVec> out{y0};
  detail::State y(y0.data(), y0.data() + y0.size());
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    detail::integrate(field, xdot, y, times[k], times[k + 1], o, d);
    out.emplace_back(Eigen::Map<const RVec>(y.data(), y0.size()));
  }
  return out;
}

/// Cauchy behaviour of solutions along a sequence of refining drivers.
struct RefinementReport {
  std::vector<RVec> endpoints;
  std::vector<double> successive_differences;  // |y_{k+1}(T) - y_k(T)|

  bool shrinking() const {
    for (std::size_t k = 1; k < successive_differences.size(); ++k)
      if (!(successive_differences[k] < successive_differences[k - 1])) return false;
    return true;
  }
};

inline RefinementReport ito_lyons_refine(const VectorField& field, const RVec& y0,
                                         const std::vector<PiecewiseLinearPath>& drivers, const OdeOptions& o = {}) {
  RefinementReport rep;
  for (const auto& x : drivers) {
    rep.endpoints.push_back(solve_piecewise_linear(field, y0, x, o).back());
    if (rep.endpoints.size() > 1)
      rep.successive_differences.push_back((rep.endpoints.back() - rep.endpoints[rep.endpoints.size() - 2]).norm());
  }
  return rep;
}

/// phi(x) as an e x d matrix for the 1-form integral int phi(x) dx.
using OneForm = std::function<void(const RVec& x, RMat& phi)>;

/// Augmented field Phi(x (+) y) x' = x' (+) phi(x) x' on R^d (+) R^e.
inline VectorField augmented_field(const OneForm& phi, int d, int e) {
  return [phi, d, e](const RVec& z, RMat& v) {
    v.setZero(d + e, d);
    v.topRows(d).setIdentity();
    RMat p(e, d);
    phi(z.head(d), p);
    v.bottomRows(e) = p;
  };
}

/// int phi(x) dx as the V_2 projection of the augmented solution from 0.
inline RVec rough_line_integral(const OneForm& phi, int e, const PiecewiseLinearPath& x, const OdeOptions& o = {}) {
  const int d = x.dim();
  RVec z0 = RVec::Zero(d + e);
  z0.head(d) = x.points.front();
  return solve_piecewise_linear(augmented_field(phi, d, e), z0, x, o).back().tail(e);
}

inline RVec rough_line_integral(const OneForm& phi, int e, const std::function<void(double, RVec&)>& xdot,
                                const RVec& x0, double t0, double t1, const OdeOptions& o = {}) {
  const int d = static_cast<int>(x0.size());
  RVec z0 = RVec::Zero(d + e);
  z0.head(d) = x0;
  return solve_smooth(augmented_field(phi, d, e), z0, xdot, d, {t0, t1}, o).back().tail(e);
}

/// Left-invariant field on the embedded group: y = U packed as real and
/// imaginary parts (row-major), V(U) dx = U sum_k dx_k X_k.
inline VectorField left_invariant_field(const lie::AlgebraModel& a) {
  const int n = a.matrix_dim;
  std::vector<Mat> basis = a.ortho_basis;
  return [basis, n](const RVec& y, RMat& v) {
    Mat u(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) u(i, j) = cplx(y(2 * (i * n + j)), y(2 * (i * n + j) + 1));
    v.resize(2 * n * n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Mat col = u * basis[k];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          v(2 * (i * n + j), static_cast<Eigen::Index>(k)) = col(i, j).real();
          v(2 * (i * n + j) + 1, static_cast<Eigen::Index>(k)) = col(i, j).imag();
        }
    }
  };
}

inline RVec pack_matrix(const Mat& u) {
  const auto n = u.rows();
  RVec y(2 * n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      y(2 * (i * n + j)) = u(i, j).real();
      y(2 * (i * n + j) + 1) = u(i, j).imag();
    }
  return y;
}

inline Mat unpack_matrix(const RVec& y) {
  const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(y.size() / 2.0)));
  Mat u(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) u(i, j) = cplx(y(2 * (i * n + j)), y(2 * (i * n + j) + 1));
  return u;
}

}  // namespace gsq::roughpath
