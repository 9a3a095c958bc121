#include <catch_amalgamated.hpp>

#include "gsq/brownian.hpp"
#include "gsq/harmonic.hpp"
#include "gsq/quantization.hpp"
#include "test_util.hpp"

using namespace gsq;

namespace {

std::shared_ptr<const quantization::MomentMap> moment() {
  static const auto m = std::make_shared<const quantization::MomentMap>(testing::su2_algebra());
  return m;
}

repr::Irrep spin(int two_j) {
  return repr::build_irrep(lie::spin_weight(*testing::su2_roots(), two_j), testing::su2_roots());
}

bool within(const brownian::McEstimate& e, cplx target, double k = 3.0, double bias = 0.0) {
  return std::abs(e.value - target) <= k * e.std_error + bias;
}

}  // namespace

TEST_CASE("Brownian paths are unitary and reproducible", "[brownian]") {
  const auto& a = *testing::su2_algebra();
  const auto p = brownian::sample_bm(a, 2.0, 1.5, 300, 5, 2);
  REQUIRE(p.points.size() == 301u);
  for (const auto& g : p.points) CHECK(g.defect() < 1e-10);
  CHECK(p.reconstruction_defect(a) < 1e-10);
  CHECK(p.times.back() == 1.5);

  const auto q = brownian::sample_bm(a, 2.0, 1.5, 300, 5, 2);
  for (std::size_t k = 0; k < p.points.size(); ++k) REQUIRE(p.points[k].u == q.points[k].u);
  const auto other = brownian::sample_bm(a, 2.0, 1.5, 300, 5, 3);
  CHECK(other.points[0].u != p.points[0].u);

  // increment covariance r dt I
  double ss = 0.0;
  for (const auto& w : p.log_increments) ss += w.squaredNorm();
  const double var = ss / (3.0 * p.n_steps());
  CHECK(std::abs(var / (2.0 * 1.5 / 300) - 1.0) < 0.15);

  CHECK_THROWS(brownian::sample_bm(a, 0.0, 1.0, 10, 1));
  CHECK_THROWS(brownian::sample_bm(a, 1.0, 1.0, 0, 1));

  const auto& su3 = lie::build_algebra("SU3");
  const auto p3 = brownian::sample_bm(su3, 1.0, 0.5, 20, 9);
  for (const auto& g : p3.points) CHECK(g.defect() < 1e-10);
}

TEST_CASE("Haar start and heat-kernel decay", "[brownian]") {
  const auto& a = *testing::su2_algebra();
  const int n_paths = 3000;
  const double r = 1.5, t = 0.8;
  for (int two_j : {1, 2}) {
    const repr::Irrep rep = spin(two_j);
    const double j = 0.5 * two_j;
    const double oracle = std::exp(-0.5 * r * t * j * (j + 1) / 2.0);
    std::vector<cplx> start(n_paths), decay(n_paths);
    for (int i = 0; i < n_paths; ++i) {
      const auto p = brownian::sample_bm(a, r, t, 40, 17, i);
      const Mat pi0 = repr::group_eval(rep, p.points.front());
      const Mat pit = repr::group_eval(rep, p.points.back());
      start[i] = pi0(0, 0);
      // normalized character of X_0^{-1} X_t
      decay[i] = (pi0.adjoint() * pit).trace() / double(rep.dim);
    }
    CHECK(within(brownian::summarize(start), 0.0));
    CHECK(within(brownian::summarize(decay), oracle, 3.0, 2e-3));
  }
}

TEST_CASE("Stratonovich line integral", "[brownian]") {
  const auto& a = *testing::su2_algebra();
  const auto& d = *testing::su2_roots();
  // one-parameter subgroup exp(s T), s in [0, t]
  const Vec tdir = Vec::Unit(3, a.torus_indices[0]) * 0.7;
  brownian::GroupPath p;
  p.points.push_back(repr::GroupElement::identity(2));
  p.times.push_back(0.0);
  const int n = 50;
  const double t = 1.3;
  for (int k = 0; k < n; ++k) {
    p.log_increments.push_back(tdir * (t / n));
    p.points.push_back(p.points.back() * repr::exp_group(a, tdir * (t / n)));
    p.times.push_back(t * (k + 1) / n);
  }
  const lie::Weight w = lie::spin_weight(d, 3);
  const cplx li = brownian::stratonovich_line_integral(d, w, p);
  CHECK(std::abs(li - t * d.evaluate(w, tdir)) < 1e-12);
  CHECK(std::abs(li.real()) < 1e-14);

  Vec real_form = Vec::Zero(3);
  real_form(0) = 1.0;
  CHECK_THROWS_AS(brownian::stratonovich_line_integral(real_form, p), NonImaginaryFormError);

  // Brownian path: purely imaginary, unit-modulus exponential
  const auto bm = brownian::sample_bm(a, 3.0, 1.0, 200, 4);
  const cplx lb = brownian::stratonovich_line_integral(brownian::action_form(d, w), bm);
  CHECK(lb.real() == 0.0);
  CHECK(std::abs(std::abs(std::exp(lb)) - 1.0) < 1e-12);
}

TEST_CASE("action functional", "[brownian]") {
  const auto& a = *testing::su2_algebra();
  const auto& d = *testing::su2_roots();
  const repr::Irrep rep = spin(1);
  const auto p = brownian::sample_bm(a, 2.0, 1.0, 64, 8);
  const auto zero = quantization::orbit_function_from_spec("zero", moment());
  const auto c = quantization::orbit_function_from_spec("const:0.75", moment());
  const auto h = quantization::orbit_function_from_spec("random:2:3", moment());

  const cplx line = brownian::stratonovich_line_integral(brownian::action_form(d, rep.lambda), p, 32);
  CHECK(std::abs(brownian::action_functional(rep, zero, p, 0.5) - line) < 1e-15);
  CHECK(std::abs(brownian::action_functional(rep, c, p, 0.5) - (line - I_unit * 0.75 * 0.5)) < 1e-14);
  const cplx ih = brownian::action_functional(rep, h, p, 1.0);
  CHECK(std::abs(ih.real()) < 1e-12);
  CHECK(std::abs(std::abs(std::exp(ih)) - 1.0) < 1e-12);
  CHECK_THROWS_AS(brownian::action_functional(rep, h, p, 0.51), TimeOffGridError);

  // lambda = 0: the line integrand is rho
  const Vec f0 = brownian::action_form(d, lie::spin_weight(d, 0));
  CHECK((f0 - brownian::form_coefficients(d, d.rho)).norm() < 1e-15);
  CHECK(f0.norm() > 0.1);
}

TEST_CASE("Feynman-Kac normalization and orthogonality", "[brownian]") {
  const repr::Irrep rep = spin(1);
  const auto zero = quantization::orbit_function_from_spec("zero", moment());
  rng::Stream s(5, 0, rng::kTestData);
  const Vec e0 = Vec::Unit(2, 0), e1 = Vec::Unit(2, 1);
  Vec w = testing::random_vec(s, 2);
  w.normalize();
  brownian::FkQuery q;
  q.hamiltonians = {zero};
  q.pairs = {{e0, e0}, {e0, e1}, {w, w}};
  brownian::FkOptions o;
  o.steps_per_unit = 128;
  for (double r : {1.0, 4.0}) {
    const auto res = brownian::fk_estimate(rep, q, r, 0.5, 4000, 21, o);
    CHECK(within(res.estimates[0][0], 1.0));
    CHECK(within(res.estimates[0][1], 0.0));
    CHECK(within(res.estimates[0][2], 1.0));
    // Z = e^{-r t c / 2}, for v1 = v_lambda and for a second unit vector
    CHECK(within(res.z, res.z_analytic));
    CHECK(res.z_analytic == Catch::Approx(std::exp(-0.5 * r * 0.5 * 0.375)));
  }
  // With the opposite sign of the line integrand the normalization
  // identity fails: the weight has to be e^{(lambda + rho)(X^{-1} dX)}.
  const auto& a = *testing::su2_algebra();
  const Vec form = brownian::action_form(*testing::su2_roots(), rep.lambda);
  const double r = 4.0, t = 0.5;
  std::vector<cplx> right(2000), flipped(2000);
  for (int i = 0; i < 2000; ++i) {
    const auto p = brownian::sample_bm(a, r, t, 64, 77, i);
    const cplx li = brownian::stratonovich_line_integral(form, p);
    const cplx ends = std::conj(repr::tilde(rep, e0, p.points.front())) * repr::tilde(rep, e0, p.points.back());
    right[i] = std::exp(li) * ends / std::exp(-0.5 * r * t * 0.375);
    flipped[i] = std::exp(-li) * ends / std::exp(-0.5 * r * t * 0.375);
  }
  const auto good = brownian::summarize(right), bad = brownian::summarize(flipped);
  CHECK(within(good, 1.0));
  CHECK(std::abs(bad.value - 1.0) > 6.0 * bad.std_error);
}

TEST_CASE("Feynman-Kac estimator against the exact semigroup", "[brownian]") {
  // At finite r the expectation is <u~| e^{-t (r/2 (Delta^alpha - c) + i V)} v~>,
  // computed in the Peter-Weyl truncation.
  const auto pw = harmonic::build_truncation(testing::su2_roots(), 8);
  const repr::Irrep& rep = pw.blocks[1];
  const auto h = quantization::orbit_function_from_spec("random:2:7", moment());
  const auto ls = harmonic::assemble_laplacians(pw, rep.lambda);
  const auto v = harmonic::multiplication_operator(
      pw, [&](const repr::GroupElement& g) { return cplx(h.lift(g)); }, quantization::haar_quadrature(12), 2);
  REQUIRE(v.exact);
  const Mat emb = harmonic::tilde_embedding(pw, rep);
  const double r = 2.0, t = 0.5;
  const Mat semigroup = expm(Mat(-t * (0.5 * r * ls.shifted.matrix + I_unit * v.matrix)));

  rng::Stream s(6, 0, rng::kTestData);
  Vec u = testing::random_vec(s, 2), w = testing::random_vec(s, 2);
  u.normalize();
  w.normalize();
  brownian::FkQuery q;
  q.hamiltonians = {h};
  q.pairs = {{u, w}, {u, u}};
  brownian::FkOptions o;
  o.steps_per_unit = 256;
  o.control_variate = true;
  const auto res = brownian::fk_estimate(rep, q, r, t, 6000, 33, o);
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& [x, y] = q.pairs[p];
    const cplx exact = (emb * x).dot(semigroup * (emb * y));
    CHECK(within(res.estimates[0][p], exact, 4.0, 2e-3));
    CHECK(within(res.plain[0][p], exact, 4.0, 2e-3));
    // the control variate only reduces variance
    CHECK(res.estimates[0][p].std_error < 0.5 * res.plain[0][p].std_error);
  }
  CHECK(unitarity_defect(expm(Mat(I_unit * 0.3 * Mat::Identity(2, 2)))) < 1e-14);
}

TEST_CASE("time rescaling and step-size robustness", "[brownian]") {
  const repr::Irrep rep = spin(1);
  const auto h = quantization::orbit_function_from_spec("random:2:7", moment());
  quantization::OrbitFunction h4 = h;
  h4.on_orbit = [h](const RVec& n) { return h.on_orbit(n) / 4.0; };
  h4.id = "random:2:7/4";
  const Vec e0 = Vec::Unit(2, 0);
  Vec v(2);
  v << std::sqrt(0.5), cplx(0.0, std::sqrt(0.5));

  brownian::FkOptions o;
  o.n_steps = 128;
  o.control_variate = true;
  // (r, t, n) against (1, r t, n) with h / r: same law after the substitution s -> r s
  const auto a = brownian::fk_estimator(rep, e0, v, h, 4.0, 0.25, 4000, 1, o);
  const auto b = brownian::fk_estimator(rep, e0, v, h4, 1.0, 1.0, 4000, 2, o);
  CHECK(std::abs(a.value - b.value) < 3.0 * std::hypot(a.std_error, b.std_error));

  // halving dt on the same Brownian motion
  brownian::FkOptions fine = o, coarse = o;
  fine.n_steps = 256;
  coarse.n_steps = 128;
  coarse.substeps = 2;
  for (bool cv : {false, true}) {
    fine.control_variate = coarse.control_variate = cv;
    const auto f = brownian::fk_estimator(rep, e0, v, h, 4.0, 0.5, 4000, 3, fine);
    const auto c = brownian::fk_estimator(rep, e0, v, h, 4.0, 0.5, 4000, 3, coarse);
    CHECK(std::abs(f.value - c.value) < f.std_error);
  }
}

TEST_CASE("estimates do not depend on the worker count", "[brownian]") {
  const repr::Irrep rep = spin(2);
  const auto h = quantization::orbit_function_from_spec("random:2:1", moment());
  const Vec u = Vec::Unit(3, 1), v = Vec::Unit(3, 0);
  brownian::FkOptions o;
  o.n_steps = 16;
  const auto ref = brownian::fk_estimator(rep, u, v, h, 1.0, 0.5, 500, 9, o);
  for (int workers : {2, 3, 8}) {
    o.workers = workers;
    const auto e = brownian::fk_estimator(rep, u, v, h, 1.0, 0.5, 500, 9, o);
    CHECK(e.value == ref.value);
    CHECK(e.std_error == ref.std_error);
  }
}
