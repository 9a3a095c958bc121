#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/linalg.hpp"

namespace gsq::lie {

/// Compact simple matrix Lie algebra with a basis orthonormal for -kappa.
struct AlgebraModel {
  std::string name;
  int matrix_dim = 0;
  int rank = 0;
  std::vector<Mat> ortho_basis;
  /// [X_a, X_b] = sum_c f(a,b,c) X_c, stored row-major in (a,b,c).
  std::vector<double> structure_constants;
  /// kappa(X_a, X_b) computed from adjoint traces.
  RMat killing_gram;
  /// Indices of the basis elements spanning the maximal torus algebra t.
  std::vector<int> torus_indices;
  /// kappa(X,Y) = trace_scale * tr(XY) (holds on simple algebras).
  double trace_scale = 0.0;
  RMat frobenius_gram_inverse;

  int dim() const { return static_cast<int>(ortho_basis.size()); }

  double f(int a, int b, int c) const {
    const int n = dim();
    return structure_constants[(static_cast<std::size_t>(a) * n + b) * n + c];
  }

  /// Real matrix of ad(X_a) on coordinates: (ad_a)_{cb} = f(a,b,c).
  RMat ad(int a) const {
    const int n = dim();
    RMat m(n, n);
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) m(c, b) = f(a, b, c);
    return m;
  }

  Mat ad(const Vec& z) const {
    Mat m = Mat::Zero(dim(), dim());
    for (int a = 0; a < dim(); ++a) m += z(a) * ad(a).cast<cplx>();
    return m;
  }

  /// Complex coordinates of m in g_C (m assumed to lie in the span).
  Vec coordinates(const Mat& m) const {
    Vec b(dim());
    for (int a = 0; a < dim(); ++a) b(a) = (ortho_basis[a].adjoint() * m).trace();
    return frobenius_gram_inverse.cast<cplx>() * b;
  }

  Mat element(const Vec& z) const {
    Mat m = Mat::Zero(matrix_dim, matrix_dim);
    for (int a = 0; a < dim(); ++a) m += z(a) * ortho_basis[a];
    return m;
  }

  Vec bracket(const Vec& x, const Vec& y) const {
    Vec out = Vec::Zero(dim());
    const int n = dim();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const cplx xy = x(a) * y(b);
        if (xy == cplx{}) continue;
        for (int c = 0; c < n; ++c) out(c) += xy * f(a, b, c);
      }
    return out;
  }

  /// Bilinear (not sesquilinear) Killing form on g_C.
  cplx killing(const Vec& x, const Vec& y) const {
    return (x.transpose() * killing_gram.cast<cplx>() * y)(0, 0);
  }

  /// Coordinates of the matrix adjoint: (sum z_a X_a)^dagger = -sum conj(z_a) X_a.
  static Vec star(const Vec& z) { return -z.conjugate(); }
};

namespace detail {

inline std::vector<double> structure_from_basis(const std::vector<Mat>& basis,
                                                const RMat& gram_inverse) {
  const int n = static_cast<int>(basis.size());
  std::vector<double> f(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Mat c = commutator(basis[a], basis[b]);
      Vec rhs(n);
      for (int k = 0; k < n; ++k) rhs(k) = (basis[k].adjoint() * c).trace();
      const Vec coords = gram_inverse.cast<cplx>() * rhs;
      for (int k = 0; k < n; ++k)
        f[(static_cast<std::size_t>(a) * n + b) * n + k] = coords(k).real();
    }
  return f;
}

inline RMat frobenius_gram(const std::vector<Mat>& basis) {
  const int n = static_cast<int>(basis.size());
  RMat g(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g(a, b) = (basis[a].adjoint() * basis[b]).trace().real();
  return g;
}

inline RMat killing_from_structure(const std::vector<double>& f, int n) {
  std::vector<RMat> ad(n, RMat(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) ad[a](c, b) = f[(static_cast<std::size_t>(a) * n + b) * n + c];
  RMat k(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) k(a, b) = (ad[a] * ad[b]).trace();
  return k;
}

/// i times the generalized Gell-Mann matrices; diagonal ones flagged.
inline std::vector<Mat> su_seed(int n, std::vector<bool>& diagonal) {
  std::vector<Mat> seed;
  diagonal.clear();
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      Mat s = Mat::Zero(n, n);
      s(j, k) = s(k, j) = 1.0;
      seed.push_back(I_unit * s);
      diagonal.push_back(false);
      Mat a = Mat::Zero(n, n);
      a(j, k) = -I_unit;
      a(k, j) = I_unit;
      seed.push_back(I_unit * a);
      diagonal.push_back(false);
    }
  for (int l = 1; l < n; ++l) {
    Mat d = Mat::Zero(n, n);
    for (int k = 0; k < l; ++k) d(k, k) = 1.0;
    d(l, l) = -static_cast<double>(l);
    d *= std::sqrt(2.0 / (l * (l + 1.0)));
    seed.push_back(I_unit * d);
    diagonal.push_back(true);
  }
  return seed;
}

}  // namespace detail

/// Builds the algebra for "SU2" (mandatory) or "SU3". The seed basis is
/// orthonormalized against the Killing form computed from adjoint traces.
inline AlgebraModel build_algebra(std::string_view name) {
  int n = 0;
  if (name == "SU2") n = 2;
  else if (name == "SU3") n = 3;
  else throw UnsupportedGroupError("unsupported group: " + std::string(name));

  std::vector<bool> diagonal;
  const std::vector<Mat> seed = detail::su_seed(n, diagonal);
  const int dim = static_cast<int>(seed.size());

  const RMat g0inv = detail::frobenius_gram(seed).inverse();
  const RMat k0 = detail::killing_from_structure(detail::structure_from_basis(seed, g0inv), dim);

  // Gram-Schmidt against -kappa, torus elements first so they stay in t.
  std::vector<int> order;
  for (int a = 0; a < dim; ++a)
    if (diagonal[a]) order.push_back(a);
  for (int a = 0; a < dim; ++a)
    if (!diagonal[a]) order.push_back(a);
  std::vector<RVec> coeffs;  // coefficients over the seed
  std::vector<int> slot(dim);
  for (int a : order) {
    RVec v = RVec::Unit(dim, a);
    for (const RVec& u : coeffs) v -= (-(u.transpose() * k0 * v)(0, 0)) * u;
    const double nrm2 = -(v.transpose() * k0 * v)(0, 0);
    if (!(nrm2 > 0.0)) throw DegeneracyError("Killing form not negative definite");
    slot[a] = static_cast<int>(coeffs.size());
    coeffs.push_back(v / std::sqrt(nrm2));
  }

  AlgebraModel m;
  m.name = std::string(name);
  m.matrix_dim = n;
  m.rank = n - 1;
  for (int a = 0; a < dim; ++a) {
    const RVec& c = coeffs[slot[a]];
    Mat x = Mat::Zero(n, n);
    for (int b = 0; b < dim; ++b) x += c(b) * seed[b];
    m.ortho_basis.push_back(x);
    if (diagonal[a]) m.torus_indices.push_back(a);
  }
  m.frobenius_gram_inverse = detail::frobenius_gram(m.ortho_basis).inverse();
  m.structure_constants = detail::structure_from_basis(m.ortho_basis, m.frobenius_gram_inverse);
  m.killing_gram = detail::killing_from_structure(m.structure_constants, dim);
  m.trace_scale = m.killing_gram(0, 0) / (m.ortho_basis[0] * m.ortho_basis[0]).trace().real();
  return m;
}

/// Element of it*, stored as coordinates in the basis dual to {T_i}.
struct Weight {
  RVec coords;

  Weight() = default;
  explicit Weight(RVec c) : coords(std::move(c)) {}
  static Weight zero(int rank) { return Weight(RVec::Zero(rank)); }

  int rank() const { return static_cast<int>(coords.size()); }
  Weight operator+(const Weight& o) const { return Weight(coords + o.coords); }
  Weight operator-(const Weight& o) const { return Weight(coords - o.coords); }
  Weight operator-() const { return Weight(-coords); }
  Weight operator*(double s) const { return Weight(coords * s); }
  friend Weight operator*(double s, const Weight& w) { return w * s; }
};

/// Roots, torus basis in it and Weyl canonical vectors.
struct CartanRootData {
  std::shared_ptr<const AlgebraModel> algebra;
  std::vector<Vec> torus_basis;  // T_i, coordinates in g_C
  RMat torus_gram;               // kappa(T_i, T_j)
  std::vector<Weight> positive_roots;
  std::vector<Weight> simple_roots;
  Weight rho;
  std::vector<Vec> raising;   // E_alpha
  std::vector<Vec> lowering;  // E_alpha^*
  /// (a,b) = a^T dual_form b on it*.
  RMat dual_form;

  int rank() const { return static_cast<int>(torus_basis.size()); }

  /// nu^{-1}(a) as an element of it, in g_C coordinates.
  Vec nu_inverse(const Weight& a) const {
    const RVec c = torus_gram.ldlt().solve(a.coords);
    Vec z = Vec::Zero(algebra->dim());
    for (int i = 0; i < rank(); ++i) z += c(i) * torus_basis[i];
    return z;
  }

  /// a(Z) = kappa(nu^{-1}(a), Z) for Z in g_C.
  cplx evaluate(const Weight& a, const Vec& z) const {
    return algebra->killing(nu_inverse(a), z);
  }
};

/// (a,b) := kappa(nu^{-1}a, nu^{-1}b), evaluated through the Killing form.
inline double dual_pairing(const Weight& a, const Weight& b, const CartanRootData& d) {
  return d.algebra->killing(d.nu_inverse(a), d.nu_inverse(b)).real();
}

namespace detail {

inline bool lex_positive(const RVec& v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > tol) return true;
    if (v(i) < -tol) return false;
  }
  return false;
}

}  // namespace detail

/// Root data from a generic element of it: its ad-eigenspaces are the
/// root spaces, and each one must be one-dimensional.
inline CartanRootData build_cartan_root_data(std::shared_ptr<const AlgebraModel> a) {
  const AlgebraModel& alg = *a;
  const int n = alg.dim();
  const int l = static_cast<int>(alg.torus_indices.size());
  CartanRootData d;
  d.algebra = a;

  // T_i = -i X_t, orthonormal for kappa since -kappa(X_t, X_s) = delta.
  for (int idx : alg.torus_indices) d.torus_basis.push_back(-I_unit * Vec(Vec::Unit(n, idx)));
  d.torus_gram.resize(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) d.torus_gram(i, j) = alg.killing(d.torus_basis[i], d.torus_basis[j]).real();
  d.dual_form = d.torus_gram.inverse();

  std::vector<Mat> adT;
  for (const Vec& t : d.torus_basis) adT.push_back(alg.ad(t));
  static constexpr double primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  Mat h = Mat::Zero(n, n);
  for (int i = 0; i < l; ++i) h += (1.0 / std::sqrt(primes[i % 8] + 0.1 * i)) * adT[i];
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const RVec& mu = es.eigenvalues();

  const double tol = 1e-8;
  int n_zero = 0;
  std::vector<int> root_cols;
  for (int k = 0; k < n; ++k) {
    if (std::abs(mu(k)) < tol) ++n_zero;
    else root_cols.push_back(k);
  }
  if (n_zero != l) throw DegeneracyError("zero weight space has wrong dimension");
  for (int k = 0; k + 1 < n; ++k)
    if (std::abs(mu(k)) >= tol && std::abs(mu(k + 1) - mu(k)) < tol)
      throw DegeneracyError("root space of dimension > 1");

  struct Found { Weight root; Vec e; };
  std::vector<Found> pos;
  for (int k : root_cols) {
    Vec e = es.eigenvectors().col(k);
    RVec coords(l);
    for (int i = 0; i < l; ++i) coords(i) = (e.adjoint() * adT[i] * e)(0, 0).real() / e.squaredNorm();
    for (int i = 0; i < l; ++i)
      if ((adT[i] * e - coords(i) * e).norm() > 1e-8 * e.norm())
        throw DegeneracyError("torus elements not simultaneously diagonal");
    if (!detail::lex_positive(coords, tol)) continue;
    // kappa(E, E^*) = -e^T K conj(e); fix the largest matrix entry real positive.
    const double kn = (-(e.transpose() * alg.killing_gram.cast<cplx>() * e.conjugate())(0, 0)).real();
    e /= std::sqrt(kn);
    const Mat m = alg.element(e);
    Eigen::Index r = 0, c = 0;
    m.cwiseAbs().maxCoeff(&r, &c);
    e *= std::conj(m(r, c)) / std::abs(m(r, c));
    pos.push_back({Weight(coords), e});
  }
  std::sort(pos.begin(), pos.end(), [&](const Found& x, const Found& y) {
    return detail::lex_positive(y.root.coords - x.root.coords, tol);
  });

  d.rho = Weight::zero(l);
  for (const Found& f : pos) {
    d.positive_roots.push_back(f.root);
    d.raising.push_back(f.e);
    d.lowering.push_back(AlgebraModel::star(f.e));
    d.rho = d.rho + 0.5 * f.root;
  }
  // Simple roots: positive roots that are not sums of two positive roots.
  for (const Found& f : pos) {
    bool decomposable = false;
    for (const Found& g : pos)
      for (const Found& h2 : pos)
        if ((g.root.coords + h2.root.coords - f.root.coords).norm() < tol) decomposable = true;
    if (!decomposable) d.simple_roots.push_back(f.root);
  }
  return d;
}

inline std::vector<double> dynkin_labels(const Weight& w, const CartanRootData& d) {
  std::vector<double> labels;
  for (const Weight& a : d.simple_roots)
    labels.push_back(2.0 * dual_pairing(w, a, d) / dual_pairing(a, a, d));
  return labels;
}

inline bool is_dominant(const Weight& w, const CartanRootData& d, double tol = 1e-9) {
  for (double x : dynkin_labels(w, d))
    if (x < -tol || std::abs(x - std::round(x)) > tol) return false;
  return true;
}

/// Weight with the given labels <lambda, alpha_i^vee>.
inline Weight weight_from_dynkin(const std::vector<int>& labels, const CartanRootData& d) {
  const int l = d.rank();
  if (static_cast<int>(labels.size()) != l)
    throw DimensionMismatchError("expected " + std::to_string(l) + " Dynkin labels");
  RMat a(l, l);
  RVec rhs(l);
  for (int i = 0; i < l; ++i) {
    const RVec& ai = d.simple_roots[i].coords;
    a.row(i) = 2.0 * (d.dual_form * ai).transpose() / (ai.transpose() * d.dual_form * ai)(0, 0);
    rhs(i) = labels[i];
  }
  return Weight(a.partialPivLu().solve(rhs));
}

/// SU(2) helper: lambda = j * alpha for spin j = two_j / 2.
inline Weight spin_weight(const CartanRootData& d, int two_j) {
  if (d.rank() != 1) throw UnsupportedGroupError("spin weights need a rank-one group");
  return weight_from_dynkin({two_j}, d);
}

}  // namespace gsq::lie
