#include <catch_amalgamated.hpp>

#include "gsq/harmonic.hpp"
#include "gsq/ito_lyons.hpp"
#include "gsq/quantization.hpp"
#include "gsq/smooth_paths.hpp"
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

TEST_CASE("Karhunen-Loeve driver", "[smooth]") {
  rng::Stream s(91, 0, rng::kTestData);
  const auto d = roughpath::sample_kl_driver(3, 2.0, 0.7, 12, s);
  CHECK(d.value(0.0).norm() == 0.0);
  CHECK((d.endpoint() - d.value(0.7)).norm() < 1e-12);
  CHECK(d.velocity(0.7).norm() < 1e-12);
  for (double u : {0.1, 0.33, 0.6}) {
    const double e = 1e-5;
    CHECK(((d.value(u + e) - d.value(u - e)) / (2 * e) - d.velocity(u)).norm() < 1e-6);
  }
  // Var b_i(t) = 2 r t sum_k ((k + 1/2) pi)^{-2} -> r t
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) sum += 2.0 / std::pow((k + 0.5) * std::numbers::pi, 2);
  CHECK(sum == Catch::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS(roughpath::sample_kl_driver(3, 1.0, 1.0, 0, s));
}

TEST_CASE("DCT velocities match direct evaluation", "[smooth]") {
  rng::Stream s(92, 0, rng::kTestData);
  for (int n : {1, 7, 64}) {
    const auto d = roughpath::sample_kl_driver(3, 4.0, 0.5, n, s);
    const roughpath::DctVelocity dct(2 * std::max(64, 8 * n));
    std::vector<double> in, out;
    RMat grid;
    dct(d, in, out, grid);
    double worst = 0.0;
    for (int m = 0; m <= dct.length(); ++m)
      worst = std::max(worst, (grid.col(m) - d.velocity(0.5 * m / dct.length())).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-11);
  }
  const roughpath::DctVelocity small(4);
  std::vector<double> in, out;
  RMat grid;
  CHECK_THROWS(small(roughpath::sample_kl_driver(1, 1.0, 1.0, 5, s), in, out, grid));
}

TEST_CASE("Magnus paths are unitary and agree with an adaptive solver", "[smooth]") {
  const auto& a = *testing::su2_algebra();
  rng::Stream s(93, 0, rng::kTestData);
  const auto field = roughpath::left_invariant_field(a);
  roughpath::OdeOptions tight;
  tight.abs_tol = tight.rel_tol = 1e-13;
  for (int n : {4, 32}) {
    const auto d = roughpath::sample_kl_driver(3, 8.0, 0.5, n, s);
    const Mat x0 = brownian::haar_su2(s);
    const auto ref = roughpath::solve_smooth(
        field, roughpath::pack_matrix(x0), [&](double u, RVec& dx) { dx = d.velocity(u); }, 3, {0.0, 0.5}, tight);
    const Mat end = roughpath::unpack_matrix(ref.back());
    const int m = roughpath::smooth_steps(8.0, 0.5, n, {});
    const auto p = roughpath::smooth_path(a, d, x0, m);
    for (const auto& g : p.points) CHECK(g.defect() < 1e-10);
    CHECK((end - p.points.back().u).norm() < 1e-4);
    // fourth order: doubling the step count cuts the error by about 16
    const double e1 = (roughpath::smooth_path(a, d, x0, 8 * m).points.back().u - end).norm();
    const double e2 = (roughpath::smooth_path(a, d, x0, 16 * m).points.back().u - end).norm();
    CHECK(e2 < e1 / 12.0);
    CHECK(e1 < 1e-7);
  }
}

TEST_CASE("smooth estimator normalization and orthogonality", "[smooth]") {
  const repr::Irrep rep = spin(1);
  const auto zero = quantization::orbit_function_from_spec("zero", moment());
  rng::Stream s(94, 0, rng::kTestData);
  Vec w = testing::random_vec(s, 2);
  w.normalize();
  brownian::FkQuery q;
  q.hamiltonians = {zero};
  q.pairs = {{w, w}, {Vec::Unit(2, 0), Vec::Unit(2, 1)}};
  for (int n : {4, 16, 64}) {
    const auto res = roughpath::smooth_estimate(rep, q, 4.0, 0.5, n, 3000, 7);
    CHECK(within(res.estimates[0][0], 1.0));
    CHECK(within(res.estimates[0][1], 0.0));
    CHECK(res.n_steps == roughpath::smooth_steps(4.0, 0.5, n, {}));
  }
}

TEST_CASE("smooth estimator approaches the Brownian semigroup", "[smooth]") {
  const auto pw = harmonic::build_truncation(testing::su2_roots(), 8);
  const repr::Irrep& rep = pw.blocks[1];
  const auto h = quantization::orbit_function_from_spec("random:2:7", moment());
  const auto ls = harmonic::assemble_laplacians(pw, rep.lambda);
  const auto v = harmonic::multiplication_operator(
      pw, [&](const repr::GroupElement& g) { return cplx(h.lift(g)); }, quantization::haar_quadrature(12), 2);
  const Mat emb = harmonic::tilde_embedding(pw, rep);
  const double r = 2.0, t = 0.5;
  const Mat semigroup = expm(Mat(-t * (0.5 * r * ls.shifted.matrix + I_unit * v.matrix)));
  rng::Stream s(95, 0, rng::kTestData);
  Vec u = testing::random_vec(s, 2), y = testing::random_vec(s, 2);
  u.normalize();
  y.normalize();
  const cplx exact = (emb * u).dot(semigroup * (emb * y));
  brownian::FkQuery q;
  q.hamiltonians = {h};
  q.pairs = {{u, y}};
  roughpath::SmoothOptions o;
  o.control_variate = true;
  const auto res = roughpath::smooth_estimate(rep, q, r, t, 64, 6000, 11, o);
  CHECK(within(res.estimates[0][0], exact, 4.0, 1e-2));
  CHECK(res.estimates[0][0].std_error < res.plain[0][0].std_error);
  o.mc_normalization = false;
  const auto analytic = roughpath::smooth_estimate(rep, q, r, t, 64, 6000, 11, o);
  CHECK(within(analytic.estimates[0][0], exact, 4.0, 1e-2));
}

TEST_CASE("smooth estimates do not depend on the worker count", "[smooth]") {
  const repr::Irrep rep = spin(1);
  const auto h = quantization::orbit_function_from_spec("random:2:3", moment());
  const Vec u = Vec::Unit(2, 1), v = Vec::Unit(2, 0);
  roughpath::SmoothOptions o;
  const auto ref = roughpath::smooth_measure_estimator(rep, u, v, h, 1.0, 0.5, 8, 400, 5, o);
  for (int workers : {2, 3, 8}) {
    o.workers = workers;
    const auto e = roughpath::smooth_measure_estimator(rep, u, v, h, 1.0, 0.5, 8, 400, 5, o);
    CHECK(e.value == ref.value);
    CHECK(e.std_error == ref.std_error);
  }
}
