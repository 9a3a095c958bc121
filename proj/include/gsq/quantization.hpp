#pragma once

#include <cmath>
#include <string>

#include "gsq/errors.hpp"
#include "gsq/haar_quadrature.hpp"
#include "gsq/harmonic.hpp"
#include "gsq/orbit_function.hpp"
#include "gsq/repr.hpp"

namespace gsq::quantization {

using repr::Irrep;

/// Default order 2 band + 2 j_lambda + 2. The integrands h^ (g . E_lambda)
/// and conj(e_a) h^ e_b have spin at most band + 2 j_lambda, so this is exact
/// with margin.
inline int default_order(const Irrep& r, const OrbitFunction& h) {
  return 2 * std::max(h.band, 0) + r.two_j + 2;
}

/// Q(h) = d_lambda int h^(g) (g . E_lambda) dg.
inline Mat gs_quantize(const Irrep& r, const OrbitFunction& h, const HaarQuadrature& q) {
  const NodeEvaluator ev(r.algebra());
  Mat acc = Mat::Zero(r.dim, r.dim);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double hv = h.lift(q.nodes[i]);
    const Vec w = ev(r, q.euler[i]) * r.hw_vector;
    acc += (q.weights[i] * hv) * (w * w.adjoint());
  }
  acc *= static_cast<double>(r.dim);
  return 0.5 * (acc + acc.adjoint());
}

/// int f(g) (g . E_lambda) dg on V_lambda.
inline Mat elambda_of_f(const Irrep& r, const harmonic::GroupFunction& f, const HaarQuadrature& q) {
  const NodeEvaluator ev(r.algebra());
  Mat acc = Mat::Zero(r.dim, r.dim);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Vec w = ev(r, q.euler[i]) * r.hw_vector;
    acc += (q.weights[i] * f(q.nodes[i])) * (w * w.adjoint());
  }
  return acc;
}

/// The same operator transported to L^2 by the isometry v -> v~
/// (N x N, acting on the truncation).
inline Mat elambda_of_f(const harmonic::PeterWeylTruncation& pw, const Irrep& r,
                        const harmonic::GroupFunction& f, const HaarQuadrature& q) {
  const Mat emb = harmonic::tilde_embedding(pw, r);
  return emb * elambda_of_f(r, f, q) * emb.adjoint();
}

/// Multiplication operator compressed to one block (rows and columns of
/// block b only); cheap when the target lives in a single block.
inline Mat block_multiplication(const harmonic::PeterWeylTruncation& pw, const harmonic::GroupFunction& f,
                                const HaarQuadrature& q, int b) {
  const Mat e = harmonic::node_basis_matrix(pw, q, b, b);
  Vec wf(static_cast<Eigen::Index>(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i) wf(static_cast<Eigen::Index>(i)) = q.weights[i] * f(q.nodes[i]);
  return e.adjoint() * wf.asDiagonal() * e;
}

struct ProjectedQuantization {
  Mat matrix;      // d x d, in the v~ basis
  bool exact = false;
};

/// V~^* M_h V~: the compression P_lambda h^ P_lambda read in the v~ basis.
inline ProjectedQuantization project_quantize(const harmonic::PeterWeylTruncation& pw, const Irrep& r,
                                              const OrbitFunction& h, const HaarQuadrature& q) {
  const int b = pw.block_of(r.two_j);
  const Mat emb = harmonic::tilde_embedding(pw, r).middleRows(pw.offsets[b], pw.block_dim(b));
  const Mat m = block_multiplication(pw, [&](const repr::GroupElement& g) { return cplx(h.lift(g)); }, q, b);
  ProjectedQuantization out;
  out.matrix = emb.adjoint() * m * emb;
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  out.exact = h.band >= 0 && q.order >= r.two_j + h.band;
  return out;
}

/// e^{i t Q}; Q must be Hermitian.
inline Mat unitary_evolve(const Mat& q, double t) {
  if (q.rows() != q.cols()) throw DimensionMismatchError("matrix is not square");
  if (hermitian_defect(q) > 1e-10 * std::max(1.0, q.norm()))
    throw NonHermitianError("unitary_evolve needs a Hermitian generator");
  return hermitian_exp_i(0.5 * (q + q.adjoint()), t);
}

}  // namespace gsq::quantization
