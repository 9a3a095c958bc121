#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gsq/errors.hpp"
#include "gsq/lie_core.hpp"
#include "gsq/repr.hpp"
#include "gsq/rng.hpp"

namespace gsq::quantization {

/// Moment coordinates n_k(g) = -kappa(X_k, Ad_g Y0) of the coherent-state
/// orbit, Y0 = i T_1. Right multiplication by the torus fixes Y0, so every
/// function of n(g) is right-T-invariant.
class MomentMap {
 public:
  explicit MomentMap(std::shared_ptr<const lie::AlgebraModel> a) : a_(std::move(a)) {
    y0_ = a_->ortho_basis[a_->torus_indices.at(0)];
    for (const Mat& x : a_->ortho_basis) probes_.push_back(-a_->trace_scale * x);
    if (a_->matrix_dim == 2) {
      y0_2_ = y0_;
      for (const Mat& p : probes_)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) probes_flat_.push_back(p(j, i));
    }
  }

  int dim() const { return static_cast<int>(probes_.size()); }

  RVec operator()(const Mat& u) const {
    const Mat ad = u * y0_ * u.adjoint();
    RVec n(dim());
    for (int k = 0; k < dim(); ++k) n(k) = (probes_[k].cwiseProduct(ad.transpose())).sum().real();
    return n;
  }

  /// Allocation-free SU(2) path for inner loops; out must have size dim().
  void operator()(const Eigen::Matrix2cd& u, RVec& out) const {
    const Eigen::Matrix2cd m = u * y0_2_;
    cplx ad[4];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) ad[2 * i + j] = m(i, 0) * std::conj(u(j, 0)) + m(i, 1) * std::conj(u(j, 1));
    for (int k = 0; k < 3; ++k) {
      const cplx* p = &probes_flat_[4 * k];
      double s = 0.0;
      for (int e = 0; e < 4; ++e) s += p[e].real() * ad[e].real() - p[e].imag() * ad[e].imag();
      out(k) = s;
    }
  }


 private:
  std::shared_ptr<const lie::AlgebraModel> a_;
  Mat y0_;
  std::vector<Mat> probes_;
  Eigen::Matrix2cd y0_2_;
  std::vector<cplx> probes_flat_;  // transposed probes, row-major
};

/// Polynomial in the moment coordinates; degree L gives spin band L.
struct OrbitPolynomial {
  std::vector<std::vector<int>> exponents;
  std::vector<double> coefficients;

  int degree() const {
    int d = 0;
    for (const auto& e : exponents) {
      int s = 0;
      for (int k : e) s += k;
      d = std::max(d, s);
    }
    return d;
  }

  double operator()(const RVec& n) const {
    double total = 0.0;
    for (std::size_t t = 0; t < exponents.size(); ++t) {
      double term = coefficients[t];
      for (std::size_t k = 0; k < exponents[t].size(); ++k)
        for (int p = 0; p < exponents[t][k]; ++p) term *= n(static_cast<Eigen::Index>(k));
      total += term;
    }
    return total;
  }
};

/// OrbitPolynomial flattened for inner loops: powers are tabulated once
/// per point and each term is a product of table lookups.
class CompiledPolynomial {
 public:
  explicit CompiledPolynomial(const OrbitPolynomial& p) : degree_(p.degree()) {
    vars_ = p.exponents.empty() ? 0 : static_cast<int>(p.exponents[0].size());
    coefficients_ = p.coefficients;
    for (const auto& e : p.exponents)
      for (int k = 0; k < vars_; ++k) offsets_.push_back(k * (degree_ + 1) + e[k]);
  }

  double operator()(const RVec& n) const {
    const int stride = degree_ + 1;
    double table[64];
    for (int k = 0; k < vars_; ++k) {
      table[k * stride] = 1.0;
      for (int p = 1; p <= degree_; ++p) table[k * stride + p] = table[k * stride + p - 1] * n(k);
    }
    double total = 0.0;
    for (std::size_t t = 0; t < coefficients_.size(); ++t) {
      double term = coefficients_[t];
      for (int k = 0; k < vars_; ++k) term *= table[offsets_[t * vars_ + k]];
      total += term;
    }
    return total;
  }

  bool fits() const { return vars_ * (degree_ + 1) <= 64; }

 private:
  int degree_ = 0, vars_ = 0;
  std::vector<double> coefficients_;
  std::vector<int> offsets_;
};

/// All exponent tuples of total degree <= degree, graded then lexicographic.
inline std::vector<std::vector<int>> monomials(int vars, int degree) {
  std::vector<std::vector<int>> out;
  for (int total = 0; total <= degree; ++total) {
    std::vector<int> e(vars, 0);
    std::function<void(int, int)> rec = [&](int k, int left) {
      if (k == vars - 1) {
        e[k] = left;
        out.push_back(e);
        return;
      }
      for (int p = left; p >= 0; --p) {
        e[k] = p;
        rec(k + 1, left - p);
      }
    };
    rec(0, total);
  }
  return out;
}

/// Real classical Hamiltonian given through its lift h^(g) = h(g . E_lambda).
struct OrbitFunction {
  std::string id;
  int band = -1;  // spin band of h^, -1 when unknown
  std::function<double(const RVec& moment)> on_orbit;
  std::shared_ptr<const MomentMap> moment;

  double lift(const Mat& u) const { return on_orbit((*moment)(u)); }
  double lift(const repr::GroupElement& g) const { return lift(g.u); }
  double lift(const Eigen::Matrix2cd& u, RVec& scratch) const {
    (*moment)(u, scratch);
    return on_orbit(scratch);
  }
  bool is_zero() const { return id == "zero"; }
};

inline OrbitFunction make_polynomial(std::string id, OrbitPolynomial p,
                                     std::shared_ptr<const MomentMap> m) {
  OrbitFunction f;
  f.id = std::move(id);
  f.band = p.degree();
  f.moment = std::move(m);
  const CompiledPolynomial c(p);
  if (c.fits()) f.on_orbit = [c](const RVec& n) { return c(n); };
  else f.on_orbit = [p = std::move(p)](const RVec& n) { return p(n); };
  return f;
}

inline OrbitFunction make_constant(double c, std::shared_ptr<const MomentMap> m) {
  OrbitFunction f;
  f.id = c == 0.0 ? "zero" : "const:" + std::to_string(c);
  f.band = 0;
  f.moment = std::move(m);
  f.on_orbit = [c](const RVec&) { return c; };
  return f;
}

/// Random polynomial of the given degree with N(0, 1/#terms) coefficients.
inline OrbitPolynomial random_polynomial(int vars, int degree, std::uint64_t seed) {
  OrbitPolynomial p;
  p.exponents = monomials(vars, degree);
  rng::Stream s(seed, 0, rng::kOrbitCoefficients);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.exponents.size()));
  for (std::size_t t = 0; t < p.exponents.size(); ++t) p.coefficients.push_back(scale * s.normal());
  return p;
}

/// Presets: "zero", "const:c", "linear:k" (n_k), "random:L:seed",
/// "coeffs:L:c0,c1,..." (coefficients in the monomials() order).
inline OrbitFunction orbit_function_from_spec(const std::string& spec,
                                              std::shared_ptr<const MomentMap> m) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw std::invalid_argument("empty Hamiltonian spec");
  const int vars = m->dim();
  try {
    if (parts[0] == "zero" && parts.size() == 1) return make_constant(0.0, m);
    if (parts[0] == "const" && parts.size() == 2) {
      OrbitFunction f = make_constant(std::stod(parts[1]), m);
      f.id = spec;
      return f;
    }
    if (parts[0] == "linear" && parts.size() == 2) {
      const int k = std::stoi(parts[1]);
      if (k < 0 || k >= vars) throw std::invalid_argument("linear index out of range");
      OrbitPolynomial p;
      std::vector<int> e(vars, 0);
      e[k] = 1;
      p.exponents = {e};
      p.coefficients = {1.0};
      return make_polynomial(spec, p, m);
    }
    if (parts[0] == "random" && parts.size() == 3)
      return make_polynomial(spec, random_polynomial(vars, std::stoi(parts[1]), std::stoull(parts[2])), m);
    if (parts[0] == "coeffs" && parts.size() == 3) {
      OrbitPolynomial p;
      p.exponents = monomials(vars, std::stoi(parts[1]));
      std::stringstream cs(parts[2]);
      for (std::string c; std::getline(cs, c, ',');) p.coefficients.push_back(std::stod(c));
      if (p.coefficients.size() != p.exponents.size())
        throw std::invalid_argument("expected " + std::to_string(p.exponents.size()) + " coefficients");
      return make_polynomial(spec, p, m);
    }
  } catch (const std::logic_error& e) {
    throw std::invalid_argument("bad Hamiltonian spec '" + spec + "': " + e.what());
  }
  throw std::invalid_argument("unknown Hamiltonian spec '" + spec + "'");
}

}  // namespace gsq::quantization
