#pragma once

#include <memory>

#include "gsq/lie_core.hpp"
#include "gsq/rng.hpp"

namespace gsq::testing {

inline std::shared_ptr<const lie::AlgebraModel> su2_algebra() {
  static const auto a = std::make_shared<const lie::AlgebraModel>(lie::build_algebra("SU2"));
  return a;
}

inline std::shared_ptr<const lie::CartanRootData> su2_roots() {
  static const auto d = std::make_shared<const lie::CartanRootData>(lie::build_cartan_root_data(su2_algebra()));
  return d;
}

inline Vec random_vec(rng::Stream& s, int n) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v(k) = cplx(s.normal(), s.normal());
  return v;
}

inline Vec random_real_vec(rng::Stream& s, int n, double scale = 1.0) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v(k) = scale * s.normal();
  return v;
}

inline RVec random_rvec(rng::Stream& s, int n, double scale = 1.0) {
  RVec v(n);
  for (int k = 0; k < n; ++k) v(k) = scale * s.normal();
  return v;
}

}  // namespace gsq::testing
