#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/lie_core.hpp"
#include "gsq/linalg.hpp"

namespace gsq::repr {

/// Element of the group in its defining representation.
struct GroupElement {
  Mat u;

  GroupElement() = default;
  explicit GroupElement(Mat m) : u(std::move(m)) {}
  static GroupElement identity(int n) { return GroupElement(Mat::Identity(n, n)); }

  GroupElement operator*(const GroupElement& o) const { return GroupElement(u * o.u); }
  GroupElement inverse() const { return GroupElement(u.adjoint()); }
  double defect() const { return unitarity_defect(u) + std::abs(u.determinant() - 1.0); }
};

inline void require_group_element(const GroupElement& g, double tol = 1e-10) {
  if (!(g.defect() < tol)) throw NonGroupElementError("matrix is not in the special unitary group");
}

/// Closed-form exponential of a traceless anti-Hermitian 2x2 matrix.
inline Eigen::Matrix2cd su2_exp(const Eigen::Matrix2cd& w) {
  const double delta = std::sqrt(std::max(0.0, w.determinant().real()));
  const double sinc = delta < 1e-8 ? 1.0 - delta * delta / 6.0 : std::sin(delta) / delta;
  return std::cos(delta) * Eigen::Matrix2cd::Identity() + sinc * w;
}

inline GroupElement exp_group(const lie::AlgebraModel& a, const Vec& x) {
  const Mat w = a.element(x);
  if (a.matrix_dim == 2) return GroupElement(Mat(su2_exp(w)));
  return GroupElement(expm(w));
}

/// log U in coordinates, with U = (-1)^negated exp(X).
struct GroupLog {
  Vec coords;
  bool negated = false;
};

/// SU(2) logarithm; the sign of the center is split off so the principal
/// branch is only used where tr U >= 0 (rotation angle <= pi/2).
inline GroupLog log_group(const lie::AlgebraModel& a, const GroupElement& g) {
  if (a.matrix_dim != 2) throw LogFailureError("closed-form logarithm only for SU(2)");
  require_group_element(g, 1e-8);
  GroupLog out;
  Eigen::Matrix2cd u = g.u;
  if (u.trace().real() < 0.0) {
    u = -u;
    out.negated = true;
  }
  const double c = std::clamp(0.5 * u.trace().real(), -1.0, 1.0);
  const double theta = std::acos(c);
  const double s = std::sin(theta);
  const double factor = theta < 1e-6 ? 1.0 + theta * theta / 6.0 : theta / s;
  const Mat y = 0.5 * factor * Mat(u - u.adjoint());
  out.coords = a.coordinates(y);
  for (Eigen::Index k = 0; k < out.coords.size(); ++k) out.coords(k) = out.coords(k).real();
  return out;
}

/// Unitary irreducible highest-weight representation (SU(2) spin-j).
struct Irrep {
  lie::Weight lambda;
  int dim = 0;
  int two_j = 0;
  std::vector<Mat> generators;     // d pi(X_k)
  std::vector<Mat> cartan_action;  // d pi(T_i)
  std::vector<Mat> raising_action;  // d pi(E_alpha)
  std::vector<Mat> lowering_action;  // d pi(E_alpha^*)
  Vec hw_vector;
  std::shared_ptr<const lie::CartanRootData> roots;
  /// Spectral data of i d pi(X_k), for fast one-parameter subgroups.
  std::vector<Mat> gen_eigvecs;
  std::vector<RVec> gen_eigvals;

  double spin() const { return 0.5 * two_j; }
  const lie::AlgebraModel& algebra() const { return *roots->algebra; }

  Mat algebra_action(const Vec& z) const {
    Mat m = Mat::Zero(dim, dim);
    for (std::size_t k = 0; k < generators.size(); ++k)
      if (z(k) != cplx{}) m += z(k) * generators[k];
    return m;
  }

  /// exp(s d pi(X_k)).
  Mat exp_generator(int k, double s) const {
    const Vec ph = (-I_unit * s * gen_eigvals[k].cast<cplx>()).array().exp();
    return gen_eigvecs[k] * ph.asDiagonal() * gen_eigvecs[k].adjoint();
  }

  /// Casimir -sum_k d pi(X_k)^2.
  Mat casimir() const {
    Mat c = Mat::Zero(dim, dim);
    for (const Mat& g : generators) c -= g * g;
    return c;
  }
};

namespace detail {

/// Angular momentum matrices J_x, J_y, J_z on the basis m = j, j-1, ..., -j.
inline std::array<Mat, 3> angular_momentum(int two_j) {
  const int d = two_j + 1;
  const double j = 0.5 * two_j;
  Mat jp = Mat::Zero(d, d), jz = Mat::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    const double m = j - a;
    jz(a, a) = m;
    if (a > 0) jp(a - 1, a) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const Mat jm = jp.adjoint();
  return {Mat(0.5 * (jp + jm)), Mat(-0.5 * I_unit * (jp - jm)), jz};
}

}  // namespace detail

/// Spin-j irrep for SU(2). The defining representation is spin 1/2, so each
/// X_k = sum_m c_km i sigma_m / 2 is sent to sum_m c_km i J_m.
inline Irrep build_irrep(const lie::Weight& lambda, std::shared_ptr<const lie::CartanRootData> d) {
  const lie::AlgebraModel& a = *d->algebra;
  if (a.name != "SU2") throw UnsupportedGroupError("irreps implemented for SU(2) only");
  if (lambda.rank() != d->rank() || !lie::is_dominant(lambda, *d))
    throw NonDominantWeightError("weight is not dominant");
  const int two_j = static_cast<int>(std::lround(lie::dynkin_labels(lambda, *d)[0]));

  Irrep r;
  r.lambda = lambda;
  r.two_j = two_j;
  r.dim = two_j + 1;
  r.roots = d;
  const auto half = detail::angular_momentum(1);
  const auto big = detail::angular_momentum(two_j);
  for (int k = 0; k < a.dim(); ++k) {
    Mat g = Mat::Zero(r.dim, r.dim);
    for (int m = 0; m < 3; ++m) {
      const double c = (-I_unit * (a.ortho_basis[k] * half[m]).trace()).real() * 2.0;
      g += c * I_unit * big[m];
    }
    r.generators.push_back(g);
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(I_unit * g));
    r.gen_eigvecs.push_back(es.eigenvectors());
    r.gen_eigvals.push_back(es.eigenvalues());
  }
  for (const Vec& t : d->torus_basis) r.cartan_action.push_back(r.algebra_action(t));
  for (const Vec& e : d->raising) r.raising_action.push_back(r.algebra_action(e));
  for (const Vec& e : d->lowering) r.lowering_action.push_back(r.algebra_action(e));
  r.hw_vector = Vec::Unit(r.dim, 0);
  return r;
}

inline Irrep build_irrep(const lie::Weight& lambda, const lie::CartanRootData& d) {
  return build_irrep(lambda, std::make_shared<const lie::CartanRootData>(d));
}

/// pi(exp X) = exp(d pi(X)).
inline Mat group_eval(const Irrep& r, const Vec& x) { return expm(r.algebra_action(x)); }

inline Mat group_eval(const Irrep& r, const GroupLog& l) {
  Mat m = group_eval(r, l.coords);
  if (l.negated && (r.two_j % 2)) m = -m;
  return m;
}

inline Mat group_eval(const Irrep& r, const GroupElement& g) {
  return group_eval(r, log_group(r.algebra(), g));
}

inline void require_dim(const Irrep& r, const Vec& v) {
  if (v.size() != r.dim)
    throw DimensionMismatchError("vector of size " + std::to_string(v.size()) +
                                 " for irrep of dimension " + std::to_string(r.dim));
}

/// <u | pi(g) v>.
inline cplx matrix_coefficient(const Irrep& r, const Vec& u, const Vec& v, const Mat& pi_g) {
  require_dim(r, u);
  require_dim(r, v);
  return u.dot(pi_g * v);
}

inline cplx matrix_coefficient(const Irrep& r, const Vec& u, const Vec& v, const GroupElement& g) {
  return matrix_coefficient(r, u, v, group_eval(r, g));
}

/// phi_lambda(g) = <v_lambda | pi(g) v_lambda>.
inline cplx spherical_function(const Irrep& r, const Mat& pi_g) {
  return r.hw_vector.dot(pi_g * r.hw_vector);
}

/// v~(g) = d^{1/2} <pi(g) v_lambda | v>.
inline cplx tilde(const Irrep& r, const Vec& v, const Mat& pi_g) {
  require_dim(r, v);
  return std::sqrt(static_cast<double>(r.dim)) * (pi_g * r.hw_vector).dot(v);
}

inline cplx tilde(const Irrep& r, const Vec& v, const GroupElement& g) {
  return tilde(r, v, group_eval(r, g));
}

/// g . E_lambda = pi(g) v v^* pi(g)^*.
inline Mat coherent_projector(const Irrep& r, const Mat& pi_g) {
  const Vec w = pi_g * r.hw_vector;
  return w * w.adjoint();
}

inline Mat coherent_projector(const Irrep& r, const GroupElement& g) {
  return coherent_projector(r, group_eval(r, g));
}

}  // namespace gsq::repr
