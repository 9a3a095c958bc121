// Quantize a random degree-2 orbit function for spin 1/2 and compare the
// Brownian path integral at r = 16 with the matrix exponential.

#include <cstdio>

#include "gsq/experiments.hpp"

using namespace gsq;

int main() {
  const harness::Context ctx(harness::preset("brownian-pi"));
  const repr::Irrep r = ctx.irrep({1});
  const auto h = ctx.hamiltonian("random:2:7");

  const Mat q = quantization::gs_quantize(r, h, quantization::haar_quadrature(quantization::default_order(r, h)));
  std::printf("Q(h) =\n");
  for (int i = 0; i < r.dim; ++i) {
    for (int k = 0; k < r.dim; ++k) std::printf("  %+.6f%+.6fi", q(i, k).real(), q(i, k).imag());
    std::printf("\n");
  }

  Vec u = Vec::Unit(2, 0), v(2);
  v << 0.6, cplx(0.0, 0.8);
  const double t = 0.5;
  const cplx oracle = harness::detail::matrix_exponential_oracle(r, h, t, u, v);

  brownian::FkOptions o;
  o.steps_per_unit = 256;
  o.control_variate = true;
  const auto e = brownian::fk_estimator(r, u, v, h, 16.0, t, 10000, 1, o);
  std::printf("<u|e^{-itQ}v>  = %+.5f%+.5fi\n", oracle.real(), oracle.imag());
  std::printf("path integral  = %+.5f%+.5fi  (std error %.5f, 1e4 paths, r = 16)\n", e.value.real(), e.value.imag(),
              e.std_error);
  return 0;
}
