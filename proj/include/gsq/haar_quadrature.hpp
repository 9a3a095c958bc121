#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/lie_core.hpp"
#include "gsq/repr.hpp"

namespace gsq::quantization {

/// Product rule on SU(2) in Euler angles U = Rz(phi) Ry(theta) Rz(psi).
/// phi and psi run over [0, 4 pi) on 2*order+1 uniform points, cos(theta)
/// on order+1 Gauss-Legendre points. Integrands whose matrix-coefficient
/// expansion stops at spin `order` are integrated exactly.
struct HaarQuadrature {
  int order = 0;
  std::vector<repr::GroupElement> nodes;
  std::vector<double> weights;
  std::vector<std::array<double, 3>> euler;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  RMat jac = RMat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k - 1, k) = jac(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(jac);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
}

/// Compensated sum.
inline double neumaier_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

inline Eigen::Matrix2cd rz(double a) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::exp(-0.5 * I_unit * a);
  m(1, 1) = std::exp(0.5 * I_unit * a);
  return m;
}

inline Eigen::Matrix2cd ry(double a) {
  Eigen::Matrix2cd m;
  m << std::cos(0.5 * a), -std::sin(0.5 * a), std::sin(0.5 * a), std::cos(0.5 * a);
  return m;
}

inline HaarQuadrature haar_quadrature(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  HaarQuadrature q;
  q.order = order;
  const int m = 2 * order + 1;
  std::vector<double> x, wx;
  gauss_legendre(order + 1, x, wx);
  const double da = 4.0 * std::numbers::pi / m;
  const double total = neumaier_sum(wx) * m * m;
  for (int i = 0; i < m; ++i)
    for (std::size_t k = 0; k < x.size(); ++k)
      for (int l = 0; l < m; ++l) {
        const double phi = i * da, theta = std::acos(x[k]), psi = l * da;
        q.euler.push_back({phi, theta, psi});
        q.nodes.emplace_back(Mat(rz(phi) * ry(theta) * rz(psi)));
        q.weights.push_back(wx[k] / total);
      }
  return q;
}

/// pi_j at a quadrature node through the Euler factorization; avoids
/// the logarithm and costs three diagonalized one-parameter exponentials.
class NodeEvaluator {
 public:
  explicit NodeEvaluator(const lie::AlgebraModel& a) {
    // -i sigma_3 / 2 and -i sigma_2 / 2 in basis coordinates.
    Mat s3(2, 2), s2(2, 2);
    s3 << 1, 0, 0, -1;
    s2 << 0, -I_unit, I_unit, 0;
    axis(a.coordinates(Mat(-0.5 * I_unit * s3)), z_index_, z_scale_);
    axis(a.coordinates(Mat(-0.5 * I_unit * s2)), y_index_, y_scale_);
  }

  Mat operator()(const repr::Irrep& r, const std::array<double, 3>& e) const {
    return r.exp_generator(z_index_, z_scale_ * e[0]) * r.exp_generator(y_index_, y_scale_ * e[1]) *
           r.exp_generator(z_index_, z_scale_ * e[2]);
  }

 private:
  static void axis(const Vec& c, int& index, double& scale) {
    Eigen::Index k = 0;
    c.cwiseAbs().maxCoeff(&k);
    if ((c - c(k) * Vec::Unit(c.size(), k)).norm() > 1e-12)
      throw UnsupportedGroupError("Euler axes are not basis directions");
    index = static_cast<int>(k);
    scale = c(k).real();
  }
  int z_index_ = 0, y_index_ = 0;
  double z_scale_ = 0.0, y_scale_ = 0.0;
};

}  // namespace gsq::quantization
