#include <catch_amalgamated.hpp>

#include "gsq/brownian.hpp"
#include "gsq/ito_lyons.hpp"
#include "test_util.hpp"

using namespace gsq;

namespace {

roughpath::PiecewiseLinearPath from_increments(const std::vector<RVec>& inc, double T) {
  roughpath::PiecewiseLinearPath x;
  RVec p = RVec::Zero(inc[0].size());
  x.times.push_back(0.0);
  x.points.push_back(p);
  for (std::size_t k = 0; k < inc.size(); ++k) {
    p += inc[k];
    x.times.push_back(T * (k + 1) / inc.size());
    x.points.push_back(p);
  }
  return x;
}

Mat exp_increment_product(const lie::AlgebraModel& a, const roughpath::PiecewiseLinearPath& x) {
  Mat u = Mat::Identity(2, 2);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) u = u * repr::exp_group(a, Vec(x.increment(k).cast<cplx>())).u;
  return u;
}

}  // namespace

TEST_CASE("constant field gives the linear solution", "[ito_lyons]") {
  rng::Stream s(81, 0, rng::kTestData);
  RMat v(2, 3);
  v << 1.0, -2.0, 0.5, 0.0, 3.0, 1.0;
  const roughpath::VectorField field = [v](const RVec&, RMat& out) { out = v; };
  roughpath::PiecewiseLinearPath x;
  RVec p = RVec::Zero(3);
  for (int k = 0; k < 6; ++k) {
    x.times.push_back(0.1 * k);
    x.points.push_back(p);
    p += testing::random_rvec(s, 3);
  }
  const RVec y0 = RVec::Constant(2, 0.25);
  const auto y = roughpath::solve_piecewise_linear(field, y0, x);
  REQUIRE(y.size() == x.size());
  for (std::size_t k = 0; k < y.size(); ++k) CHECK((y[k] - (y0 + v * (x.points[k] - x.points[0]))).norm() < 1e-12);
}

TEST_CASE("left-invariant field stays on the group", "[ito_lyons]") {
  const auto& a = *testing::su2_algebra();
  rng::Stream s(82, 0, rng::kTestData);
  const auto field = roughpath::left_invariant_field(a);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = from_increments(roughpath::brownian_increments(3, 2.0, 5, s), 1.0);
    const Mat u0 = brownian::haar_su2(s);
    const auto y = roughpath::solve_piecewise_linear(field, roughpath::pack_matrix(u0), x);
    for (const RVec& yk : y) CHECK(unitarity_defect(roughpath::unpack_matrix(yk)) < 1e-8);
    CHECK((roughpath::unpack_matrix(y.back()) - u0 * exp_increment_product(a, x)).norm() < 1e-8);
  }
}

TEST_CASE("refinements of a Brownian driver are Cauchy", "[ito_lyons]") {
  const auto& a = *testing::su2_algebra();
  const auto field = roughpath::left_invariant_field(a);
  const RVec y0 = roughpath::pack_matrix(Mat::Identity(2, 2));
  const int samples = 16;
  std::vector<double> mean_diff(3, 0.0);
  for (int i = 0; i < samples; ++i) {
    rng::Stream s(83, static_cast<std::uint64_t>(i), rng::kTestData);
    const auto fine = roughpath::brownian_increments(3, 4.0, 7, s);
    std::vector<roughpath::PiecewiseLinearPath> drivers;
    for (int level : {4, 5, 6, 7}) drivers.push_back(from_increments(roughpath::coarsen(fine, level), 1.0));
    const auto rep = roughpath::ito_lyons_refine(field, y0, drivers);
    REQUIRE(rep.successive_differences.size() == 3u);
    for (int k = 0; k < 3; ++k) mean_diff[k] += rep.successive_differences[k] / samples;
  }
  CHECK(mean_diff[1] < mean_diff[0]);
  CHECK(mean_diff[2] < mean_diff[1]);
  roughpath::RefinementReport r;
  r.successive_differences = {1.0, 0.5, 0.6};
  CHECK_FALSE(r.shrinking());
}

TEST_CASE("rough-path endpoint law matches the Brownian sampler", "[ito_lyons]") {
  const auto& a = *testing::su2_algebra();
  const auto field = roughpath::left_invariant_field(a);
  const double r = 1.0, t = 1.0;
  const int samples = 400;
  const RVec y0 = roughpath::pack_matrix(Mat::Identity(2, 2));
  std::vector<cplx> rough(samples), bm(samples);
  for (int i = 0; i < samples; ++i) {
    rng::Stream s(84, static_cast<std::uint64_t>(i), rng::kTestData);
    const auto x = from_increments(roughpath::brownian_increments(3, r * t, 6, s), t);
    rough[i] = 0.5 * roughpath::unpack_matrix(roughpath::solve_piecewise_linear(field, y0, x).back()).trace().real();
    const auto p = brownian::sample_bm(a, r, t, 64, 85, i);
    bm[i] = 0.5 * (p.points.front().u.adjoint() * p.points.back().u).trace().real();
  }
  const auto er = brownian::summarize(rough), eb = brownian::summarize(bm);
  const double sigma = std::hypot(er.std_error, eb.std_error);
  CHECK(std::abs(er.value - eb.value) < 4.0 * sigma);
  // both against the heat-kernel decay of the spin-1/2 character
  const double oracle = std::exp(-0.5 * r * t * 0.375);
  CHECK(std::abs(er.value - oracle) < 4.0 * er.std_error + 2e-3);
}

TEST_CASE("blow-up surfaces as divergence", "[ito_lyons]") {
  const roughpath::VectorField field = [](const RVec& y, RMat& v) {
    v.resize(1, 1);
    v(0, 0) = y(0) * y(0);
  };
  roughpath::PiecewiseLinearPath x{{0.0, 2.0}, {RVec::Zero(1), RVec::Constant(1, 2.0)}};
  CHECK_THROWS_AS(roughpath::solve_piecewise_linear(field, RVec::Ones(1), x), DivergenceError);
  // before the blow-up time the solution is 1 / (1 - t)
  roughpath::PiecewiseLinearPath half{{0.0, 0.5}, {RVec::Zero(1), RVec::Constant(1, 0.5)}};
  CHECK(roughpath::solve_piecewise_linear(field, RVec::Ones(1), half).back()(0) == Catch::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("rough line integrals", "[ito_lyons]") {
  // phi(x) dx = (x1 dx2 - x2 dx1) / 2, the area form
  const roughpath::OneForm area = [](const RVec& x, RMat& phi) {
    phi.resize(1, 2);
    phi << -0.5 * x(1), 0.5 * x(0);
  };
  rng::Stream s(86, 0, rng::kTestData);
  const auto x = from_increments(roughpath::brownian_increments(2, 1.0, 4, s), 1.0);
  const double lifted = roughpath::lift(x).increment(0, x.size() - 1).antisymmetric()(0, 1);
  CHECK(roughpath::rough_line_integral(area, 1, x)(0) == Catch::Approx(lifted).margin(1e-9));

  // smooth driver: unit circle, classical integral = T / 2
  const double T = 1.3;
  const auto circle_dot = [](double u, RVec& dx) {
    dx.resize(2);
    dx << -std::sin(u), std::cos(u);
  };
  RVec x0(2);
  x0 << 1.0, 0.0;
  CHECK(std::abs(roughpath::rough_line_integral(area, 1, circle_dot, x0, 0.0, T)(0) - 0.5 * T) < 1e-8);

  // dyadic piecewise-linear samples of the circle converge to the same value
  double prev = 1.0;
  for (int level = 2; level <= 10; level += 2) {
    roughpath::PiecewiseLinearPath c;
    const int n = 1 << level;
    for (int k = 0; k <= n; ++k) {
      const double u = T * k / n;
      c.times.push_back(u);
      RVec p(2);
      p << std::cos(u), std::sin(u);
      c.points.push_back(p);
    }
    const double err = std::abs(roughpath::rough_line_integral(area, 1, c)(0) - 0.5 * T);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-6);
}
