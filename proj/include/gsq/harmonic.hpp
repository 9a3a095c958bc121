#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/haar_quadrature.hpp"
#include "gsq/lie_core.hpp"
#include "gsq/repr.hpp"

namespace gsq::harmonic {

using repr::GroupElement;
using repr::Irrep;

/// L^2(SU(2)) truncated to spins j <= J. Block j is spanned by
/// e^j_ab(g) = sqrt(d_j) pi_j(g)_ab, stored at offset + a*d_j + b.
struct PeterWeylTruncation {
  int two_j_max = 0;
  std::vector<Irrep> blocks;  // blocks[b] has two_j == b
  std::vector<int> offsets;
  int total_dim = 0;
  std::shared_ptr<const lie::CartanRootData> roots;

  int n_blocks() const { return static_cast<int>(blocks.size()); }
  int block_dim(int b) const { return blocks[b].dim * blocks[b].dim; }
  int index(int b, int a, int c) const { return offsets[b] + a * blocks[b].dim + c; }

  int block_of(int two_j) const {
    if (two_j < 0 || two_j > two_j_max)
      throw CutoffTooSmallError("spin " + std::to_string(0.5 * two_j) + " outside cutoff " +
                                std::to_string(0.5 * two_j_max));
    return two_j;
  }

  /// Values of all basis functions given pi_j(g) for every block.
  Vec basis_values(const std::vector<Mat>& pis) const {
    Vec out(total_dim);
    for (int b = 0; b < n_blocks(); ++b) {
      const int d = blocks[b].dim;
      const double s = std::sqrt(static_cast<double>(d));
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) out(index(b, a, c)) = s * pis[b](a, c);
    }
    return out;
  }

  std::vector<Mat> block_reps(const GroupElement& g) const {
    const repr::GroupLog l = repr::log_group(blocks[0].algebra(), g);
    std::vector<Mat> pis;
    for (const Irrep& r : blocks) pis.push_back(repr::group_eval(r, l));
    return pis;
  }

  Vec basis_values(const GroupElement& g) const { return basis_values(block_reps(g)); }

  cplx evaluate(const Vec& coeffs, const GroupElement& g) const {
    return basis_values(g).transpose() * coeffs;
  }
};

inline PeterWeylTruncation build_truncation(std::shared_ptr<const lie::CartanRootData> d, int two_j_max) {
  if (two_j_max < 0) throw CutoffTooSmallError("negative cutoff");
  PeterWeylTruncation pw;
  pw.two_j_max = two_j_max;
  pw.roots = d;
  for (int tj = 0; tj <= two_j_max; ++tj) {
    pw.blocks.push_back(repr::build_irrep(lie::spin_weight(*d, tj), d));
    pw.offsets.push_back(pw.total_dim);
    pw.total_dim += (tj + 1) * (tj + 1);
  }
  return pw;
}

/// Dense operator on the truncation with audit metadata.
struct BlockOperator {
  Mat matrix;
  bool hermitian = false;
  std::string provenance;
  bool exact = true;

  RVec eigenvalues() const {
    if (!hermitian) throw NonHermitianError(provenance + " is not flagged Hermitian");
    return Eigen::SelfAdjointEigenSolver<Mat>(matrix, Eigen::EigenvaluesOnly).eigenvalues();
  }
};

/// Right action X^R e_ab = sum_c e_ac d pi(X)_cb, i.e. d pi(X) on the second slot.
inline BlockOperator build_right_action(const PeterWeylTruncation& pw, const Vec& x) {
  BlockOperator op;
  op.matrix = Mat::Zero(pw.total_dim, pw.total_dim);
  for (int b = 0; b < pw.n_blocks(); ++b) {
    const int d = pw.blocks[b].dim;
    const Mat dpi = pw.blocks[b].algebra_action(x);
    for (int a = 0; a < d; ++a)
      op.matrix.block(pw.index(b, a, 0), pw.index(b, a, 0), d, d) = dpi;
  }
  op.hermitian = hermitian_defect(op.matrix) < 1e-12;
  op.provenance = "right action X^R";
  return op;
}

struct LaplacianSet {
  BlockOperator laplacian;      // Delta = -sum (X_k^R)^2
  BlockOperator magnetic;       // Delta^{-(lambda+rho)}, coordinate form
  BlockOperator magnetic_alt;   // Delta - 2 nu^{-1}(alpha)^R + (alpha, alpha)
  BlockOperator torus_partial;  // Delta_t^{-lambda}
  BlockOperator c_plus;         // sum_alpha E_alpha^R E_alpha^{*R}
  BlockOperator shifted;        // Delta^{-(lambda+rho)} - c_lambda
  double c_lambda = 0.0;        // <2 lambda + rho | rho>
  double route_residual = 0.0;  // ||magnetic - magnetic_alt||
  double decomposition_residual = 0.0;  // ||magnetic - torus_partial - 2 c_plus - c_lambda||
};

inline BlockOperator hermitian_operator(Mat m, std::string provenance) {
  BlockOperator op;
  op.hermitian = hermitian_defect(m) < 1e-9 * std::max(1.0, m.norm());
  op.matrix = std::move(m);
  op.provenance = std::move(provenance);
  return op;
}

/// Assembles Delta, the magnetic Laplacian Delta^alpha with alpha = -(lambda+rho)
/// (twice, by independent formulas), Delta_t^{-lambda} and c_+^R.
inline LaplacianSet assemble_laplacians(const PeterWeylTruncation& pw, const lie::Weight& lambda) {
  const lie::CartanRootData& d = *pw.roots;
  const lie::AlgebraModel& a = *d.algebra;
  if (!lie::is_dominant(lambda, d)) throw NonDominantWeightError("weight is not dominant");
  const int two_j = static_cast<int>(std::lround(lie::dynkin_labels(lambda, d)[0]));
  pw.block_of(two_j);

  const int n = pw.total_dim;
  const Mat id = Mat::Identity(n, n);
  const lie::Weight alpha = -(lambda + d.rho);

  std::vector<Mat> xr;
  for (int k = 0; k < a.dim(); ++k) xr.push_back(build_right_action(pw, Vec::Unit(a.dim(), k)).matrix);

  LaplacianSet s;
  Mat lap = Mat::Zero(n, n);
  for (const Mat& x : xr) lap -= x * x;
  s.laplacian = hermitian_operator(lap, "Delta = -sum_k (X_k^R)^2");

  // Coordinate form: -sum_k (X_k^R + i a_k)^2 with a_k = i alpha(X_k) real.
  Mat mag = Mat::Zero(n, n);
  for (int k = 0; k < a.dim(); ++k) {
    const cplx ak = I_unit * d.evaluate(alpha, Vec::Unit(a.dim(), k));
    const Mat y = xr[k] + I_unit * ak * id;
    mag -= y * y;
  }
  s.magnetic = hermitian_operator(mag, "Delta^alpha = -sum_k (X_k^R + i a_k)^2");

  const Mat nu_alpha = build_right_action(pw, d.nu_inverse(alpha)).matrix;
  s.magnetic_alt = hermitian_operator(lap - 2.0 * nu_alpha + lie::dual_pairing(alpha, alpha, d) * id,
                                      "Delta^alpha = Delta - 2 nu^{-1}(alpha)^R + (alpha, alpha)");

  Mat tp = Mat::Zero(n, n);
  for (const Vec& t : d.torus_basis) {
    const Mat y = build_right_action(pw, t).matrix + d.evaluate(lambda, t) * id;
    tp += y * y;
  }
  s.torus_partial = hermitian_operator(tp, "Delta_t^{-lambda} = sum_i (T_i^R + lambda(T_i))^2");

  Mat cp = Mat::Zero(n, n);
  for (std::size_t r = 0; r < d.raising.size(); ++r)
    cp += build_right_action(pw, d.raising[r]).matrix * build_right_action(pw, d.lowering[r]).matrix;
  s.c_plus = hermitian_operator(cp, "c_+^R = sum_alpha E_alpha^R E_alpha^{*R}");

  s.c_lambda = lie::dual_pairing(2.0 * lambda + d.rho, d.rho, d);
  s.shifted = hermitian_operator(mag - s.c_lambda * id, "Delta^{-(lambda+rho)} - <2 lambda + rho | rho>");
  s.route_residual = (s.magnetic.matrix - s.magnetic_alt.matrix).norm();
  s.decomposition_residual = (mag - tp - 2.0 * cp - s.c_lambda * id).norm();
  return s;
}

struct GroundSpace {
  Mat basis;      // orthonormal columns
  RVec levels;    // eigenvalues found within tolerance
};

/// Eigenvectors of a Hermitian operator with eigenvalue within tol of level.
inline GroundSpace ground_space(const BlockOperator& op, double level, double tol = 1e-8) {
  if (!op.hermitian) throw NonHermitianError(op.provenance + " is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(op.matrix);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (std::abs(es.eigenvalues()(k) - level) <= tol) cols.push_back(k);
  if (cols.empty()) throw EmptyEigenspaceError("no eigenvalue within tolerance of the level");
  GroundSpace g;
  g.basis.resize(op.matrix.rows(), static_cast<Eigen::Index>(cols.size()));
  g.levels.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    g.basis.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(cols[i]);
    g.levels(static_cast<Eigen::Index>(i)) = es.eigenvalues()(cols[i]);
  }
  return g;
}

/// Smallest eigenvalue strictly above threshold (the spectral gap eps_1 for
/// the shifted magnetic Laplacian).
inline double first_positive_eigenvalue(const BlockOperator& op, double threshold = 1e-8) {
  const RVec ev = op.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev(k) > threshold) return ev(k);
  throw EmptyEigenspaceError("no positive eigenvalue");
}

/// Values of the basis functions at every quadrature node (rows = nodes).
inline Mat node_basis_matrix(const PeterWeylTruncation& pw, const quantization::HaarQuadrature& q,
                             int block_lo = 0, int block_hi = -1) {
  if (block_hi < 0) block_hi = pw.n_blocks() - 1;
  const quantization::NodeEvaluator ev(pw.blocks[0].algebra());
  const int lo = pw.offsets[block_lo];
  const int hi = pw.offsets[block_hi] + pw.block_dim(block_hi);
  Mat e(static_cast<Eigen::Index>(q.size()), hi - lo);
  for (std::size_t i = 0; i < q.size(); ++i)
    for (int b = block_lo; b <= block_hi; ++b) {
      const int d = pw.blocks[b].dim;
      const double s = std::sqrt(static_cast<double>(d));
      const Mat pi = ev(pw.blocks[b], q.euler[i]);
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) e(static_cast<Eigen::Index>(i), pw.index(b, a, c) - lo) = s * pi(a, c);
    }
  return e;
}

using GroupFunction = std::function<cplx(const GroupElement&)>;

/// M_ab = <e_a | f e_b> by quadrature. Flagged exact when f has a known
/// spin band and the rule integrates spin 2J + band.
inline BlockOperator multiplication_operator(const PeterWeylTruncation& pw, const GroupFunction& f,
                                             const quantization::HaarQuadrature& q,
                                             std::optional<int> band = std::nullopt) {
  const Mat e = node_basis_matrix(pw, q);
  Vec wf(static_cast<Eigen::Index>(q.size()));
  bool real = true;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const cplx v = f(q.nodes[i]);
    if (v.imag() != 0.0) real = false;
    wf(static_cast<Eigen::Index>(i)) = q.weights[i] * v;
  }
  BlockOperator op;
  op.matrix = e.adjoint() * wf.asDiagonal() * e;
  if (real) op.matrix = 0.5 * (op.matrix + op.matrix.adjoint()).eval();
  op.hermitian = real;
  op.exact = band.has_value() && q.order >= pw.two_j_max + *band;
  op.provenance = std::string("multiplication operator, quadrature order ") + std::to_string(q.order) +
                  (op.exact ? " (exact)" : " (truncated)");
  return op;
}

/// e^{-t T_r} f with T_r = r (Delta^{-(lambda+rho)} - c_lambda) + i V.
inline Vec semigroup_propagate(const BlockOperator& shifted, const BlockOperator& v, double r, double t,
                               const Vec& f) {
  const Mat tr = r * shifted.matrix + I_unit * v.matrix;
  return expm(Mat(-t * tr)) * f;
}

/// G e^{i t C} G^* f with C = G^* V G, the compression to the ground space G.
inline Vec compressed_unitary_propagate(const GroundSpace& g, const BlockOperator& v, double t, const Vec& f) {
  const Mat c = g.basis.adjoint() * v.matrix * g.basis;
  const Mat herm = 0.5 * (c + c.adjoint());
  return g.basis * (hermitian_exp_i(herm, t) * (g.basis.adjoint() * f));
}

/// Coefficients of v~ for the standard basis of V_lambda: column c is the
/// expansion of e_c~. Exact at quadrature order 2 j_lambda.
inline Mat tilde_embedding(const PeterWeylTruncation& pw, const Irrep& r) {
  const int b = pw.block_of(r.two_j);
  const quantization::HaarQuadrature q = quantization::haar_quadrature(std::max(1, r.two_j));
  const quantization::NodeEvaluator ev(r.algebra());
  const int d = r.dim;
  Mat out = Mat::Zero(pw.total_dim, d);
  const double s = std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Mat pi = ev(r, q.euler[i]);
    const Vec w = pi * r.hw_vector;  // pi(g) v_lambda
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c) {
        // <e_ac | e_k~> = int conj(s pi_ac) s conj(w_k)
        const cplx basis_conj = std::conj(s * pi(a, c));
        for (int k = 0; k < d; ++k)
          out(pw.index(b, a, c), k) += q.weights[i] * basis_conj * s * std::conj(w(k));
      }
  }
  return out;
}

}  // namespace gsq::harmonic
