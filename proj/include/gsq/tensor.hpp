#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/linalg.hpp"

namespace gsq::roughpath {

/// Element of the truncated tensor algebra T^{<=N}(R^d). Level k is stored
/// flat, row-major over the k indices (size d^k).
class TruncatedTensor {
 public:
  TruncatedTensor() = default;
  TruncatedTensor(int d, int depth) : d_(d), depth_(depth) {
    if (d < 1 || depth < 0) throw ShapeMismatchError("tensor needs d >= 1 and N >= 0");
    std::size_t size = 1;
    for (int k = 0; k <= depth; ++k) {
      levels.emplace_back(RVec::Zero(static_cast<Eigen::Index>(size)));
      size *= static_cast<std::size_t>(d);
    }
  }

  static TruncatedTensor one(int d, int depth) {
    TruncatedTensor t(d, depth);
    t.levels[0](0) = 1.0;
    return t;
  }

  /// 0 + v (nilpotent part only).
  static TruncatedTensor from_vector(const RVec& v, int depth) {
    TruncatedTensor t(static_cast<int>(v.size()), depth);
    if (depth >= 1) t.levels[1] = v;
    return t;
  }

  int dim() const { return d_; }
  int depth() const { return depth_; }
  double scalar() const { return levels[0](0); }

  /// Level 2 as a d x d matrix (entry (i, j) = coefficient of e_i (x) e_j).
  RMat level2() const {
    if (depth_ < 2) throw ShapeMismatchError("tensor has no level 2");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(levels[2].data(),
                                                                                                  d_, d_);
  }

  void require_same_shape(const TruncatedTensor& o) const {
    if (d_ != o.d_ || depth_ != o.depth_)
      throw ShapeMismatchError("tensor shapes differ: (d=" + std::to_string(d_) + ", N=" + std::to_string(depth_) +
                               ") vs (d=" + std::to_string(o.d_) + ", N=" + std::to_string(o.depth_) + ")");
  }

  TruncatedTensor operator+(const TruncatedTensor& o) const {
    require_same_shape(o);
    TruncatedTensor r = *this;
    for (int k = 0; k <= depth_; ++k) r.levels[k] += o.levels[k];
    return r;
  }

  TruncatedTensor operator-(const TruncatedTensor& o) const { return *this + o * -1.0; }

  TruncatedTensor operator*(double s) const {
    TruncatedTensor r = *this;
    for (auto& l : r.levels) l *= s;
    return r;
  }

  /// Truncated tensor product pr_{<=N}(x (x) y).
  TruncatedTensor operator*(const TruncatedTensor& o) const {
    require_same_shape(o);
    TruncatedTensor r(d_, depth_);
    for (int k = 0; k <= depth_; ++k)
      for (int i = 0; i <= k; ++i) {
        const RVec& a = levels[i];
        const RVec& b = o.levels[k - i];
        if (a.isZero(0.0) || b.isZero(0.0)) continue;
        // (a (x) b) flat index = ia * size(b) + ib
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> out(
            r.levels[k].data(), a.size(), b.size());
        out.noalias() += a * b.transpose();
      }
    return r;
  }

  double max_abs_diff(const TruncatedTensor& o) const {
    require_same_shape(o);
    double m = 0.0;
    for (int k = 0; k <= depth_; ++k) m = std::max(m, (levels[k] - o.levels[k]).cwiseAbs().maxCoeff());
    return m;
  }

  std::vector<RVec> levels;

 private:
  int d_ = 0, depth_ = 0;
};

/// exp(x) = sum_{n<=N} x^n / n!, for x with a scalar part c handled as e^c.
inline TruncatedTensor exp(const TruncatedTensor& x) {
  TruncatedTensor y = x;
  const double c = y.levels[0](0);
  y.levels[0](0) = 0.0;
  TruncatedTensor sum = TruncatedTensor::one(x.dim(), x.depth());
  TruncatedTensor term = sum;
  for (int n = 1; n <= x.depth(); ++n) {
    term = term * y * (1.0 / n);
    sum = sum + term;
  }
  return sum * std::exp(c);
}

/// log(x) for x with positive scalar part: log c + sum (-1)^{n+1} y^n / n,
/// y = x / c - 1.
inline TruncatedTensor log(const TruncatedTensor& x) {
  const double c = x.levels[0](0);
  if (!(c > 0.0)) throw std::domain_error("log needs a positive scalar part");
  TruncatedTensor y = x * (1.0 / c);
  y.levels[0](0) = 0.0;
  TruncatedTensor sum(x.dim(), x.depth());
  TruncatedTensor power = TruncatedTensor::one(x.dim(), x.depth());
  for (int n = 1; n <= x.depth(); ++n) {
    power = power * y;
    sum = sum + power * ((n % 2 ? 1.0 : -1.0) / n);
  }
  sum.levels[0](0) = std::log(c);
  return sum;
}

/// Inverse via exp(-log x).
inline TruncatedTensor inverse(const TruncatedTensor& x) { return exp(log(x) * -1.0); }

}  // namespace gsq::roughpath
